//! The three training pools compared by the evaluation: real only,
//! synthetic only, and both together.

use serde::{Deserialize, Serialize};

use super::cv::{monte_carlo_cv, CvConfig};
use super::forest::{train_forest, ForestConfig};
use super::{ClassifyError, Result};
use crate::bvh::Label;
use crate::features::{FeatureVector, FEATURE_NAMES};
use crate::metrics::{EvalReport, PopulationScores};

pub const ARM_NAMES: [&str; 3] = ["Base", "Syn", "Syn+Base"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmResult {
    pub report: EvalReport,
    /// Gini importance in feature-name order, from a forest fit on the whole arm.
    pub importance: Vec<f64>,
}

/// Sorted distinct labels.
pub fn label_set(features: &[FeatureVector]) -> Vec<Label> {
    let mut labels: Vec<Label> = features.iter().map(|f| f.label.clone()).collect();
    labels.sort();
    labels.dedup();
    labels
}

/// Rows and class indices against a fixed class order.
pub fn to_matrix(features: &[FeatureVector], classes: &[Label]) -> Result<(Vec<Vec<f64>>, Vec<usize>)> {
    let mut x = Vec::with_capacity(features.len());
    let mut y = Vec::with_capacity(features.len());
    for f in features {
        let k = classes
            .iter()
            .position(|c| *c == f.label)
            .ok_or_else(|| ClassifyError::UnknownLabel(f.label.clone()))?;
        x.push(f.values().to_vec());
        y.push(k);
    }
    Ok((x, y))
}

pub fn run_experiment_arms(
    baseline: &[FeatureVector],
    synthetic: &[FeatureVector],
    population: &PopulationScores,
    cv: &CvConfig,
    forest: &ForestConfig,
    seed: u64,
) -> Result<Vec<ArmResult>> {
    if baseline.is_empty() || synthetic.is_empty() {
        return Err(ClassifyError::EmptyInput);
    }
    let classes = label_set(baseline);
    if label_set(synthetic) != classes {
        return Err(ClassifyError::LabelSetMismatch);
    }
    let both: Vec<FeatureVector> = synthetic.iter().chain(baseline).cloned().collect();
    let pools: [&[FeatureVector]; 3] = [baseline, synthetic, &both];

    ARM_NAMES
        .iter()
        .zip(pools)
        .map(|(name, pool)| {
            let (x, y) = to_matrix(pool, &classes)?;
            // Every arm sees the same seed so the comparison is paired.
            let classification = monte_carlo_cv(&x, &y, cv, forest, seed)?;
            let importance = train_forest(&x, &y, &ForestConfig { seed, ..forest.clone() })?.feature_importance()?;
            Ok(ArmResult {
                report: EvalReport {
                    arm: name.to_string(),
                    sample_count: pool.len(),
                    population: population.clone(),
                    classification,
                },
                importance,
            })
        })
        .collect()
}

/// `arm,feature,importance` rows.
pub fn write_importance_csv<W: std::io::Write>(arms: &[ArmResult], writer: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["arm", "feature", "importance"])?;
    for arm in arms {
        for (name, v) in FEATURE_NAMES.iter().zip(&arm.importance) {
            w.write_record([arm.report.arm.as_str(), name, &v.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bvh::Provenance;

    fn fv(label: Label, v: f64, provenance: Provenance) -> FeatureVector {
        FeatureVector {
            velocity_mean: v,
            acceleration_mean: v * 2.0,
            jerk_mean: 1.0,
            angular_velocity_mean: (v * 7.3).sin(),
            range_of_motion: 3.0,
            spatial_path: v * v,
            harmonics_magnitude: 0.5,
            label,
            provenance,
        }
    }

    fn pool(provenance: Provenance, n: usize) -> Vec<FeatureVector> {
        (0..n)
            .flat_map(|i| {
                let j = i as f64 * 0.1;
                [fv(Label::Angry, 5.0 + j, provenance), fv(Label::Neutral, 1.0 + j, provenance)]
            })
            .collect()
    }

    fn population() -> PopulationScores {
        PopulationScores {
            fid_k: 0.0,
            diversity_real: 0.0,
            diversity_synth: 0.0,
            fidelity: 0.0,
            dtw_mean: 0.0,
            mpjpe_mean: 0.0,
        }
    }

    #[test]
    fn three_arms_in_order() {
        let base = pool(Provenance::Real, 5);
        let syn = pool(Provenance::Synthetic, 8);
        let cv = CvConfig { runs: 3, train_fraction: 0.7 };
        let f = ForestConfig { tree_count: 10, ..Default::default() };
        let arms = run_experiment_arms(&base, &syn, &population(), &cv, &f, 1).unwrap();
        let names: Vec<&str> = arms.iter().map(|a| a.report.arm.as_str()).collect();
        assert_eq!(names, ARM_NAMES);
        let sizes: Vec<usize> = arms.iter().map(|a| a.report.sample_count).collect();
        assert_eq!(sizes, [10, 16, 26]);
        for a in &arms {
            assert_eq!(a.report.classification.stat("accuracy").unwrap().mean, 1.0);
            assert_eq!(a.importance.len(), 7);
        }
        let mut buf = Vec::new();
        write_importance_csv(&arms, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1 + 21);
    }

    #[test]
    fn label_sets_must_match() {
        let base = pool(Provenance::Real, 3);
        let syn: Vec<FeatureVector> = (0..4).map(|i| fv(Label::Angry, i as f64, Provenance::Synthetic)).collect();
        let r = run_experiment_arms(&base, &syn, &population(), &CvConfig::default(), &ForestConfig::default(), 0);
        assert_eq!(r, Err(ClassifyError::LabelSetMismatch));
        let r = run_experiment_arms(&[], &syn, &population(), &CvConfig::default(), &ForestConfig::default(), 0);
        assert_eq!(r, Err(ClassifyError::EmptyInput));
    }
}
