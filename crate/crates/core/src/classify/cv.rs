//! Stratified Monte Carlo cross-validation.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::forest::{check_matrix, train_forest, ForestConfig};
use super::scores::{classification_metrics, ClassificationScores, ConfusionMatrix};
use super::{ClassifyError, Result};
use crate::seed::{derive_seed, rng_for};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CvConfig {
    pub runs: usize,
    pub train_fraction: f64,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig { runs: 20, train_fraction: 0.7 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Stat {
        if values.is_empty() {
            return Stat { mean: 0.0, std: 0.0 };
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Stat { mean, std: var.sqrt() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvRun {
    pub seed: u64,
    pub scores: ClassificationScores,
    pub confusion: ConfusionMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub runs: Vec<CvRun>,
}

impl CvResult {
    /// Mean and spread of every score across runs.
    pub fn summary(&self) -> Vec<(&'static str, Stat)> {
        ClassificationScores::NAMES
            .iter()
            .enumerate()
            .map(|(i, name)| {
                let col: Vec<f64> = self.runs.iter().map(|r| r.scores.values()[i]).collect();
                (*name, Stat::of(&col))
            })
            .collect()
    }

    pub fn stat(&self, name: &str) -> Option<Stat> {
        self.summary().into_iter().find(|(n, _)| *n == name).map(|(_, s)| s)
    }

    /// Long-form `run,metric,value` rows.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["run", "metric", "value"])?;
        for (i, run) in self.runs.iter().enumerate() {
            for (name, v) in ClassificationScores::NAMES.iter().zip(run.scores.values()) {
                w.write_record([i.to_string(), name.to_string(), v.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Per-class shuffle and split; each class keeps at least one sample on both
/// sides.
pub fn stratified_split<R: Rng>(y: &[usize], train_fraction: f64, rng: &mut R) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(ClassifyError::InvalidConfig);
    }
    let n_classes = y.iter().max().map_or(0, |m| m + 1);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for k in 0..n_classes {
        let mut members: Vec<usize> = (0..y.len()).filter(|&i| y[i] == k).collect();
        if members.is_empty() {
            continue;
        }
        if members.len() < 2 {
            return Err(ClassifyError::ClassTooSmall { class: k, count: members.len() });
        }
        members.shuffle(rng);
        let cut = ((train_fraction * members.len() as f64).round() as usize).clamp(1, members.len() - 1);
        train.extend_from_slice(&members[..cut]);
        test.extend_from_slice(&members[cut..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Repeated stratified train/test splits, each scored on its held-out part.
pub fn monte_carlo_cv(
    x: &[Vec<f64>],
    y: &[usize],
    cv: &CvConfig,
    forest: &ForestConfig,
    seed: u64,
) -> Result<CvResult> {
    check_matrix(x)?;
    if y.len() != x.len() {
        return Err(ClassifyError::DimensionMismatch { expected: x.len(), found: y.len() });
    }
    if cv.runs == 0 {
        return Err(ClassifyError::InvalidConfig);
    }
    let n_classes = y.iter().max().map_or(0, |m| m + 1);
    let runs = (0..cv.runs)
        .into_par_iter()
        .map(|r| {
            let run_seed = derive_seed(seed, &[r as u64]);
            let mut rng = rng_for(run_seed, &[0]);
            let (train, test) = stratified_split(y, cv.train_fraction, &mut rng)?;
            let pick = |idx: &[usize]| -> (Vec<Vec<f64>>, Vec<usize>) {
                (idx.iter().map(|&i| x[i].clone()).collect(), idx.iter().map(|&i| y[i]).collect())
            };
            let (xtr, ytr) = pick(&train);
            let (xte, yte) = pick(&test);
            let config = ForestConfig { seed: derive_seed(run_seed, &[1]), ..forest.clone() };
            let model = train_forest(&xtr, &ytr, &config)?;
            let predicted = model.predict(&xte)?;
            let confusion = ConfusionMatrix::from_predictions(n_classes, &yte, &predicted)?;
            let scores = classification_metrics(&confusion)?;
            Ok(CvRun { seed: run_seed, scores, confusion })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CvResult { runs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{prop_assert, prop_assert_eq, proptest};

    #[test]
    fn stat_is_population() {
        let s = Stat::of(&[1.0, 3.0]);
        assert_eq!(s.mean, 2.0);
        assert_eq!(s.std, 1.0);
    }

    #[test]
    fn split_keeps_every_class_on_both_sides() {
        let y = vec![0, 0, 0, 0, 1, 1, 2, 2, 2];
        let mut rng = rng_for(3, &[]);
        let (tr, te) = stratified_split(&y, 0.7, &mut rng).unwrap();
        for k in 0..3 {
            assert!(tr.iter().any(|&i| y[i] == k));
            assert!(te.iter().any(|&i| y[i] == k));
        }
        assert_eq!(tr.len() + te.len(), y.len());
    }

    #[test]
    fn split_rejects_singletons() {
        let mut rng = rng_for(3, &[]);
        assert_eq!(
            stratified_split(&[0, 0, 1], 0.7, &mut rng),
            Err(ClassifyError::ClassTooSmall { class: 1, count: 1 })
        );
    }

    #[test]
    fn cv_is_deterministic_and_scores_separable_data() {
        let x: Vec<Vec<f64>> = (0..20).map(|i| vec![(i % 2) as f64 * 10.0 + (i as f64) * 0.01, 1.0]).collect();
        let y: Vec<usize> = (0..20).map(|i| i % 2).collect();
        let cv = CvConfig { runs: 5, train_fraction: 0.7 };
        let f = ForestConfig { tree_count: 10, ..Default::default() };
        let a = monte_carlo_cv(&x, &y, &cv, &f, 11).unwrap();
        assert_eq!(a, monte_carlo_cv(&x, &y, &cv, &f, 11).unwrap());
        assert_eq!(a.runs.len(), 5);
        assert_eq!(a.stat("accuracy").unwrap().mean, 1.0);
        let mut buf = Vec::new();
        a.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1 + 5 * 8);
    }

    proptest! {
        #[test]
        fn split_partitions_indices(counts in proptest::collection::vec(2usize..12, 2..5), frac in 0.1f64..0.9, seed in 0u64..1000) {
            let y: Vec<usize> = counts.iter().enumerate().flat_map(|(k, &c)| std::iter::repeat(k).take(c)).collect();
            let mut rng = rng_for(seed, &[]);
            let (tr, te) = stratified_split(&y, frac, &mut rng).unwrap();
            let mut all: Vec<usize> = tr.iter().chain(&te).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..y.len()).collect::<Vec<_>>());
            for (k, &c) in counts.iter().enumerate() {
                let ntr = tr.iter().filter(|&&i| y[i] == k).count();
                prop_assert!(ntr >= 1 && ntr < c);
            }
        }
    }
}
