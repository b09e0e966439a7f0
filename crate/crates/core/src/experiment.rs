//! Clip-level evaluation: features, population metrics and the three
//! classification arms, plus the tables the plots are drawn from.

use std::io;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bvh::{MotionClip, Skeleton};
use crate::classify::{self, ArmResult, ClassifyError, CvConfig, ForestConfig};
use crate::features::{self, FeatureError, FeatureVector, FEATURE_NAMES};
use crate::metrics::{self, MetricError, PopulationScores};
use crate::motion::{self, MotionError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error("features: {0}")]
    Feature(#[from] FeatureError),
    #[error("metrics: {0}")]
    Metric(#[from] MetricError),
    #[error("classifier: {0}")]
    Classify(#[from] ClassifyError),
    #[error("motion: {0}")]
    Motion(#[from] MotionError),
    #[error("{real} real clips but {held_out} held-out flags")]
    MaskLength { real: usize, held_out: usize },
    #[error("reference {index} is out of range for {real} real clips")]
    BadReference { index: usize, real: usize },
    #[error("csv: {0}")]
    Csv(String),
}

pub type Result<T> = std::result::Result<T, ExperimentError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub cv: CvConfig,
    /// Run the three classification arms; off leaves only population scores.
    pub arms: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig { cv: CvConfig::default(), arms: true }
    }
}

pub struct EvalInputs<'a> {
    pub skeleton: &'a Skeleton,
    /// Every real clip; the population the metrics compare against.
    pub real: &'a [MotionClip],
    /// Parallel to `real`; held-out clips are left out of the Base arm.
    pub held_out: &'a [bool],
    pub synthetic: &'a [MotionClip],
    /// Index into `real` of each synthetic clip's generation reference.
    pub references: &'a [Option<usize>],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub synthetic: String,
    pub real: String,
    pub dtw: f64,
    pub mpjpe: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub population: PopulationScores,
    pub arms: Vec<ArmResult>,
    pub real_features: Vec<FeatureVector>,
    pub synthetic_features: Vec<FeatureVector>,
    pub pairs: Vec<PairRecord>,
}

pub fn extract_all(skeleton: &Skeleton, clips: &[MotionClip]) -> Result<Vec<FeatureVector>> {
    clips
        .par_iter()
        .map(|c| Ok(features::extract_features(skeleton, c)?))
        .collect()
}

/// Mean joint error of a synthetic clip against its reference; the synthetic
/// clip is resampled first when the lengths differ.
fn paired_mpjpe(skeleton: &Skeleton, synth: &MotionClip, real: &MotionClip) -> Result<f64> {
    let synth = if synth.frame_count() == real.frame_count() {
        synth.clone()
    } else {
        motion::resample(synth, real.frame_count())?
    };
    let a = motion::forward_kinematics(skeleton, &synth)?;
    let b = motion::forward_kinematics(skeleton, real)?;
    Ok(metrics::mpjpe(&a, &b)?)
}

pub fn evaluate(inputs: &EvalInputs<'_>, config: &ExperimentConfig, forest: &ForestConfig, seed: u64) -> Result<Evaluation> {
    let EvalInputs { skeleton, real, held_out, synthetic, references } = *inputs;
    if held_out.len() != real.len() {
        return Err(ExperimentError::MaskLength { real: real.len(), held_out: held_out.len() });
    }
    if let Some(&index) = references.iter().flatten().find(|&&i| i >= real.len()) {
        return Err(ExperimentError::BadReference { index, real: real.len() });
    }
    if real.is_empty() || synthetic.is_empty() {
        return Err(ClassifyError::EmptyInput.into());
    }

    let real_features = extract_all(skeleton, real)?;
    let synthetic_features = extract_all(skeleton, synthetic)?;

    let (dtw_mean, dtw_pairs) = metrics::dtw_population(real, synthetic, references)?;
    let pairs = dtw_pairs
        .par_iter()
        .map(|p| {
            let (s, r) = (&synthetic[p.synth_index], &real[p.real_index]);
            Ok(PairRecord {
                synthetic: s.source_id.clone(),
                real: r.source_id.clone(),
                dtw: p.dtw,
                mpjpe: paired_mpjpe(skeleton, s, r)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mpjpe_mean = pairs.iter().map(|p| p.mpjpe).sum::<f64>() / pairs.len() as f64;

    let population = PopulationScores {
        fid_k: metrics::fid(&real_features, &synthetic_features)?,
        diversity_real: metrics::diversity(&real_features)?,
        diversity_synth: metrics::diversity(&synthetic_features)?,
        fidelity: metrics::fidelity(&real_features, &synthetic_features)?,
        dtw_mean,
        mpjpe_mean,
    };

    let base: Vec<FeatureVector> = real_features
        .iter()
        .zip(held_out)
        .filter(|(_, &h)| !h)
        .map(|(f, _)| f.clone())
        .collect();
    let arms = if config.arms {
        classify::run_experiment_arms(&base, &synthetic_features, &population, &config.cv, forest, seed)?
    } else {
        Vec::new()
    };

    Ok(Evaluation { population, arms, real_features, synthetic_features, pairs })
}

pub fn write_pairs_csv<W: io::Write>(pairs: &[PairRecord], writer: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for p in pairs {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}

/// Root X/Z ground track of every clip: `clip,label,provenance,frame,x,z`.
pub fn write_trajectory_csv<W: io::Write>(skeleton: &Skeleton, clips: &[&MotionClip], writer: W) -> Result<()> {
    let tracks = clips
        .par_iter()
        .map(|c| motion::forward_kinematics(skeleton, c))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let io_err = |e: csv::Error| ExperimentError::Csv(e.to_string());
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["clip", "label", "provenance", "frame", "x", "z"]).map_err(io_err)?;
    for (clip, track) in clips.iter().zip(&tracks) {
        let (label, prov) = (clip.label.to_string(), clip.provenance.to_string());
        for (f, row) in track.positions.iter().enumerate() {
            let root = row[0];
            w.write_record([
                clip.source_id.as_str(),
                &label,
                &prov,
                &f.to_string(),
                &root[0].to_string(),
                &root[2].to_string(),
            ])
            .map_err(io_err)?;
        }
    }
    w.flush().map_err(|e| ExperimentError::Csv(e.to_string()))?;
    Ok(())
}

/// Pearson correlation between feature columns; constant columns correlate 0
/// with everything except themselves.
pub fn feature_correlation(features: &[FeatureVector]) -> Vec<Vec<f64>> {
    let d = FEATURE_NAMES.len();
    let n = features.len().max(1) as f64;
    let cols: Vec<Vec<f64>> = (0..d).map(|j| features.iter().map(|f| f.values()[j]).collect()).collect();
    let centered: Vec<Vec<f64>> = cols
        .iter()
        .map(|c| {
            let m = c.iter().sum::<f64>() / n;
            c.iter().map(|v| v - m).collect()
        })
        .collect();
    let norms: Vec<f64> = centered.iter().map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
    (0..d)
        .map(|a| {
            (0..d)
                .map(|b| {
                    if a == b {
                        1.0
                    } else if norms[a] == 0.0 || norms[b] == 0.0 {
                        0.0
                    } else {
                        centered[a].iter().zip(&centered[b]).map(|(x, y)| x * y).sum::<f64>() / (norms[a] * norms[b])
                    }
                })
                .collect()
        })
        .collect()
}

pub fn write_correlation_csv<W: io::Write>(matrix: &[Vec<f64>], writer: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["feature"];
    header.extend(FEATURE_NAMES);
    w.write_record(&header)?;
    for (name, row) in FEATURE_NAMES.iter().zip(matrix) {
        let mut rec = vec![name.to_string()];
        rec.extend(row.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bvh::{Label, Provenance};

    fn fv(a: f64, b: f64) -> FeatureVector {
        FeatureVector {
            velocity_mean: a,
            acceleration_mean: 2.0 * a + 1.0,
            jerk_mean: -a,
            angular_velocity_mean: b,
            range_of_motion: 4.0,
            spatial_path: a * b,
            harmonics_magnitude: 0.0,
            label: Label::Neutral,
            provenance: Provenance::Real,
        }
    }

    #[test]
    fn correlation_structure() {
        let fs: Vec<FeatureVector> = [(1.0, 2.0), (2.0, -1.0), (3.0, 0.5), (5.0, 1.0)].iter().map(|&(a, b)| fv(a, b)).collect();
        let m = feature_correlation(&fs);
        assert!((m[0][1] - 1.0).abs() < 1e-12);
        assert!((m[0][2] + 1.0).abs() < 1e-12);
        assert_eq!(m[0][4], 0.0);
        assert_eq!(m[4][4], 1.0);
        for a in 0..7 {
            for b in 0..7 {
                assert_eq!(m[a][b], m[b][a]);
            }
        }
        let mut buf = Vec::new();
        write_correlation_csv(&m, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 8);
    }
}
