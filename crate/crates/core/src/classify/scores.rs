//! Confusion matrices and the scores derived from them.

use serde::{Deserialize, Serialize};

use super::{ClassifyError, Result};

/// `counts[true][predicted]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(n_classes: usize) -> Self {
        ConfusionMatrix { counts: vec![vec![0; n_classes]; n_classes] }
    }

    pub fn from_predictions(n_classes: usize, truth: &[usize], predicted: &[usize]) -> Result<Self> {
        if truth.len() != predicted.len() {
            return Err(ClassifyError::DimensionMismatch { expected: truth.len(), found: predicted.len() });
        }
        let mut m = Self::new(n_classes);
        for (&t, &p) in truth.iter().zip(predicted) {
            m.counts[t][p] += 1;
        }
        Ok(m)
    }

    pub fn n_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationScores {
    pub accuracy: f64,
    /// Macro averages.
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub micro_precision: f64,
    pub micro_recall: f64,
    pub micro_f1: f64,
    /// Multiclass Matthews correlation.
    pub mcc: f64,
}

impl ClassificationScores {
    pub const NAMES: [&'static str; 8] = [
        "accuracy",
        "precision",
        "recall",
        "f1",
        "micro_precision",
        "micro_recall",
        "micro_f1",
        "mcc",
    ];

    pub fn values(&self) -> [f64; 8] {
        [
            self.accuracy,
            self.precision,
            self.recall,
            self.f1,
            self.micro_precision,
            self.micro_recall,
            self.micro_f1,
            self.mcc,
        ]
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

fn f1(p: f64, r: f64) -> f64 {
    ratio(2.0 * p * r, p + r)
}

/// Per-class `(precision, recall, f1)`.
pub fn per_class(cm: &ConfusionMatrix) -> Vec<(f64, f64, f64)> {
    let k = cm.n_classes();
    (0..k)
        .map(|c| {
            let tp = cm.counts[c][c] as f64;
            let predicted: u64 = (0..k).map(|t| cm.counts[t][c]).sum();
            let actual: u64 = cm.counts[c].iter().sum();
            let p = ratio(tp, predicted as f64);
            let r = ratio(tp, actual as f64);
            (p, r, f1(p, r))
        })
        .collect()
}

pub fn classification_metrics(cm: &ConfusionMatrix) -> Result<ClassificationScores> {
    let k = cm.n_classes();
    let total = cm.total();
    if k == 0 || total == 0 {
        return Err(ClassifyError::EmptyMatrix);
    }
    let s = total as f64;
    let correct: u64 = (0..k).map(|c| cm.counts[c][c]).sum();
    let c = correct as f64;
    let accuracy = c / s;

    let pc = per_class(cm);
    let kf = k as f64;
    let precision = pc.iter().map(|v| v.0).sum::<f64>() / kf;
    let recall = pc.iter().map(|v| v.1).sum::<f64>() / kf;
    let macro_f1 = pc.iter().map(|v| v.2).sum::<f64>() / kf;

    // Single-label multiclass: every miss is one FP and one FN, so the micro
    // averages all collapse to accuracy.
    let micro_precision = accuracy;
    let micro_recall = accuracy;
    let micro_f1 = f1(micro_precision, micro_recall);

    let t: Vec<f64> = (0..k).map(|i| cm.counts[i].iter().sum::<u64>() as f64).collect();
    let p: Vec<f64> = (0..k).map(|j| (0..k).map(|i| cm.counts[i][j]).sum::<u64>() as f64).collect();
    let tp: f64 = t.iter().zip(&p).map(|(a, b)| a * b).sum();
    let tt: f64 = t.iter().map(|a| a * a).sum();
    let pp: f64 = p.iter().map(|a| a * a).sum();
    let mcc = ratio(c * s - tp, ((s * s - pp) * (s * s - tt)).sqrt());

    Ok(ClassificationScores {
        accuracy,
        precision,
        recall,
        f1: macro_f1,
        micro_precision,
        micro_recall,
        micro_f1,
        mcc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn perfect_and_empty() {
        let cm = ConfusionMatrix { counts: vec![vec![3, 0, 0], vec![0, 2, 0], vec![0, 0, 4]] };
        let s = classification_metrics(&cm).unwrap();
        for v in s.values() {
            assert!(close(v, 1.0));
        }
        assert_eq!(classification_metrics(&ConfusionMatrix::new(3)), Err(ClassifyError::EmptyMatrix));
    }

    #[test]
    fn zero_over_zero_is_zero() {
        // Class 1 is never predicted and never present.
        let cm = ConfusionMatrix { counts: vec![vec![2, 0], vec![0, 0]] };
        let s = classification_metrics(&cm).unwrap();
        assert!(close(s.precision, 0.5));
        assert!(close(s.mcc, 0.0));
    }

    #[test]
    fn three_class_hand_worked() {
        // Rows are truth.  tp = 5, 3, 2.
        let cm = ConfusionMatrix { counts: vec![vec![5, 1, 0], vec![2, 3, 1], vec![0, 1, 2]] };
        let s = classification_metrics(&cm).unwrap();
        assert!(close(s.accuracy, 10.0 / 15.0));
        let p = (5.0 / 7.0 + 3.0 / 5.0 + 2.0 / 3.0) / 3.0;
        let r = (5.0 / 6.0 + 3.0 / 6.0 + 2.0 / 3.0) / 3.0;
        assert!(close(s.precision, p));
        assert!(close(s.recall, r));
        // t = (6,6,3), p = (7,5,3), c = 10, s = 15.
        let mcc = (10.0 * 15.0 - (42.0 + 30.0 + 9.0)) / ((225.0f64 - 83.0) * (225.0 - 81.0)).sqrt();
        assert!(close(s.mcc, mcc));
    }

    #[test]
    fn binary_reduces_to_standard_formulas() {
        for tp in 0..=6u64 {
            for fnn in 0..=6 - tp {
                for fp in 0..=6 - tp - fnn {
                    for tn in 0..=6 - tp - fnn - fp {
                        if tp + fnn + fp + tn == 0 {
                            continue;
                        }
                        // Class 0 is the positive class.
                        let cm = ConfusionMatrix { counts: vec![vec![tp, fnn], vec![fp, tn]] };
                        let s = classification_metrics(&cm).unwrap();
                        let (tpf, fnf, fpf, tnf) = (tp as f64, fnn as f64, fp as f64, tn as f64);
                        let n = tpf + fnf + fpf + tnf;
                        assert!(close(s.accuracy, (tpf + tnf) / n));
                        let pc = per_class(&cm);
                        assert!(close(pc[0].0, ratio(tpf, tpf + fpf)));
                        assert!(close(pc[0].1, ratio(tpf, tpf + fnf)));
                        let den = ((tpf + fpf) * (tpf + fnf) * (tnf + fpf) * (tnf + fnf)).sqrt();
                        let mcc = ratio(tpf * tnf - fpf * fnf, den);
                        assert!((s.mcc - mcc).abs() < 1e-9, "{tp} {fnn} {fp} {tn}: {} {}", s.mcc, mcc);
                    }
                }
            }
        }
    }
}
