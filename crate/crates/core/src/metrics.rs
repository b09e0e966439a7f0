//! Population-level quality metrics for synthetic motion.
//!
//! FID here is computed on the seven kinematic features rather than on a
//! learned embedding, so values are labelled `fid_k` in reports and are only
//! comparable with each other.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bvh::{Label, MotionClip};
use crate::classify::CvResult;
use crate::features::FeatureVector;
use crate::motion::JointPositions;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("need at least {needed} samples, found {found}")]
    TooFewSamples { needed: usize, found: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("empty sequence")]
    EmptyInput,
    #[error("shape mismatch: {left:?} vs {right:?} (frames, joints)")]
    ShapeMismatch { left: (usize, usize), right: (usize, usize) },
    #[error("no real sample of class `{0}`")]
    MissingClass(Label),
    #[error("real samples are all identical")]
    DegenerateReference,
}

pub type Result<T> = std::result::Result<T, MetricError>;

/// Added to each covariance diagonal before the matrix square root.
pub const COVARIANCE_RIDGE: f64 = 1e-6;

fn at_least(found: usize, needed: usize) -> Result<()> {
    if found < needed {
        Err(MetricError::TooFewSamples { needed, found })
    } else {
        Ok(())
    }
}

fn same_width(rows: &[Vec<f64>]) -> Result<usize> {
    let d = rows.first().map_or(0, Vec::len);
    match rows.iter().find(|r| r.len() != d) {
        Some(r) => Err(MetricError::DimensionMismatch { left: d, right: r.len() }),
        None => Ok(d),
    }
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn rows_of(features: &[FeatureVector]) -> Vec<Vec<f64>> {
    features.iter().map(|f| f.values().to_vec()).collect()
}

/// Mean and population covariance of a sample.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMoments {
    pub mean: DVector<f64>,
    pub covariance: DMatrix<f64>,
    pub sample_count: usize,
}

impl GaussianMoments {
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self> {
        at_least(rows.len(), 1)?;
        let d = same_width(rows)?;
        let n = rows.len() as f64;
        let mut mean = DVector::zeros(d);
        for r in rows {
            mean += DVector::from_column_slice(r);
        }
        mean /= n;
        let mut covariance = DMatrix::zeros(d, d);
        for r in rows {
            let c = DVector::from_column_slice(r) - &mean;
            covariance += &c * c.transpose();
        }
        covariance /= n;
        Ok(GaussianMoments {
            mean,
            covariance,
            sample_count: rows.len(),
        })
    }
}

/// Symmetric PSD square root; negative eigenvalues are clamped to zero.
fn sqrt_psd(m: &DMatrix<f64>) -> DMatrix<f64> {
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    &eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.transpose()
}

/// Fréchet distance between Gaussians fitted to two row sets.
pub fn fid_rows(real: &[Vec<f64>], synth: &[Vec<f64>]) -> Result<f64> {
    at_least(real.len(), 2)?;
    at_least(synth.len(), 2)?;
    let a = GaussianMoments::fit(real)?;
    let b = GaussianMoments::fit(synth)?;
    let d = a.mean.len();
    if b.mean.len() != d {
        return Err(MetricError::DimensionMismatch {
            left: d,
            right: b.mean.len(),
        });
    }
    let ridge = DMatrix::identity(d, d) * COVARIANCE_RIDGE;
    let sa = &a.covariance + &ridge;
    let sb = &b.covariance + &ridge;

    let root_a = sqrt_psd(&sa);
    let inner = &root_a * &sb * &root_a;
    let inner = (&inner + inner.transpose()) * 0.5;
    let cross_trace: f64 = SymmetricEigen::new(inner)
        .eigenvalues
        .iter()
        .map(|l| l.max(0.0).sqrt())
        .sum();

    let mean_term = (&a.mean - &b.mean).norm_squared();
    Ok((mean_term + sa.trace() + sb.trace() - 2.0 * cross_trace).max(0.0))
}

pub fn fid(real: &[FeatureVector], synth: &[FeatureVector]) -> Result<f64> {
    fid_rows(&rows_of(real), &rows_of(synth))
}

/// Mean Euclidean distance over all unordered pairs.
pub fn diversity_rows(rows: &[Vec<f64>]) -> Result<f64> {
    at_least(rows.len(), 2)?;
    same_width(rows)?;
    let n = rows.len();
    let sums: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| (i + 1..n).map(|j| euclid(&rows[i], &rows[j])).sum())
        .collect();
    Ok(sums.iter().sum::<f64>() / (n * (n - 1) / 2) as f64)
}

pub fn diversity(features: &[FeatureVector]) -> Result<f64> {
    diversity_rows(&rows_of(features))
}

/// Negated mean nearest same-class real distance of the synthetic samples,
/// normalised by the mean pairwise distance among real samples. Zero means
/// every synthetic sample coincides with a real one.
pub fn fidelity_rows(real: &[(Vec<f64>, Label)], synth: &[(Vec<f64>, Label)]) -> Result<f64> {
    at_least(real.len(), 2)?;
    at_least(synth.len(), 1)?;
    let real_rows: Vec<Vec<f64>> = real.iter().map(|(r, _)| r.clone()).collect();
    let d = same_width(&real_rows)?;
    let spread = diversity_rows(&real_rows)?;

    let mut total = 0.0;
    for (row, label) in synth {
        if row.len() != d {
            return Err(MetricError::DimensionMismatch { left: d, right: row.len() });
        }
        let nearest = real
            .iter()
            .filter(|(_, l)| l == label)
            .map(|(r, _)| euclid(r, row))
            .fold(f64::INFINITY, f64::min);
        if nearest.is_infinite() {
            return Err(MetricError::MissingClass(label.clone()));
        }
        total += nearest;
    }
    let mean_nearest = total / synth.len() as f64;
    if mean_nearest == 0.0 {
        return Ok(0.0);
    }
    if spread == 0.0 {
        return Err(MetricError::DegenerateReference);
    }
    Ok(-mean_nearest / spread)
}

pub fn fidelity(real: &[FeatureVector], synth: &[FeatureVector]) -> Result<f64> {
    let tag = |fs: &[FeatureVector]| -> Vec<(Vec<f64>, Label)> {
        fs.iter().map(|f| (f.values().to_vec(), f.label.clone())).collect()
    };
    fidelity_rows(&tag(real), &tag(synth))
}

/// Dynamic time warping with Euclidean frame cost and the symmetric
/// match / insert / delete step set. No window constraint.
pub fn dtw(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    let d = a[0].len();
    if let Some(r) = a.iter().chain(b).find(|r| r.len() != d) {
        return Err(MetricError::DimensionMismatch { left: d, right: r.len() });
    }
    let m = b.len();
    let mut prev = vec![f64::INFINITY; m + 1];
    let mut cur = vec![f64::INFINITY; m + 1];
    prev[0] = 0.0;
    for x in a {
        cur[0] = f64::INFINITY;
        for j in 1..=m {
            let best = prev[j - 1].min(prev[j]).min(cur[j - 1]);
            cur[j] = euclid(x, &b[j - 1]) + best;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[m])
}

/// One synthetic clip matched to the real clip it is scored against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairScore {
    pub synth_index: usize,
    pub real_index: usize,
    pub dtw: f64,
}

/// Mean DTW of each synthetic clip against its generation reference, or,
/// when the reference is unknown, the closest real clip of the same class.
pub fn dtw_population(
    real: &[MotionClip],
    synth: &[MotionClip],
    references: &[Option<usize>],
) -> Result<(f64, Vec<PairScore>)> {
    at_least(real.len(), 1)?;
    at_least(synth.len(), 1)?;
    let pairs = synth
        .par_iter()
        .enumerate()
        .map(|(i, s)| match references.get(i).copied().flatten() {
            Some(r) => Ok(PairScore {
                synth_index: i,
                real_index: r,
                dtw: dtw(&s.frames, &real[r].frames)?,
            }),
            None => {
                let mut best: Option<PairScore> = None;
                for (r, clip) in real.iter().enumerate().filter(|(_, c)| c.label == s.label) {
                    let cost = dtw(&s.frames, &clip.frames)?;
                    if best.as_ref().map_or(true, |b| cost < b.dtw) {
                        best = Some(PairScore {
                            synth_index: i,
                            real_index: r,
                            dtw: cost,
                        });
                    }
                }
                best.ok_or_else(|| MetricError::MissingClass(s.label.clone()))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mean = pairs.iter().map(|p| p.dtw).sum::<f64>() / pairs.len() as f64;
    Ok((mean, pairs))
}

/// Mean per-joint position error between equally shaped sequences.
pub fn mpjpe(a: &JointPositions, b: &JointPositions) -> Result<f64> {
    let shape = |p: &JointPositions| (p.frame_count(), p.joint_count());
    if shape(a) != shape(b) || a.positions.iter().chain(&b.positions).any(|r| r.len() != a.joint_count()) {
        return Err(MetricError::ShapeMismatch {
            left: shape(a),
            right: shape(b),
        });
    }
    if a.frame_count() == 0 || a.joint_count() == 0 {
        return Err(MetricError::EmptyInput);
    }
    let total: f64 = a
        .positions
        .iter()
        .zip(&b.positions)
        .flat_map(|(ra, rb)| ra.iter().zip(rb))
        .map(|(p, q)| euclid(p, q))
        .sum();
    Ok(total / (a.frame_count() * a.joint_count()) as f64)
}

/// Real-versus-synthetic scores shared by every experiment arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationScores {
    pub fid_k: f64,
    pub diversity_real: f64,
    pub diversity_synth: f64,
    pub fidelity: f64,
    pub dtw_mean: f64,
    pub mpjpe_mean: f64,
}

/// Scores for one experiment arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub arm: String,
    pub sample_count: usize,
    pub population: PopulationScores,
    pub classification: CvResult,
}

impl EvalReport {
    /// `key = value` lines in a fixed order.
    pub fn to_kv_text(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("arm", self.arm.clone());
        kv("samples", self.sample_count.to_string());
        kv("runs", self.classification.runs.len().to_string());
        let p = &self.population;
        kv("fid_k", p.fid_k.to_string());
        kv("diversity_real", p.diversity_real.to_string());
        kv("diversity_synth", p.diversity_synth.to_string());
        kv("fidelity", p.fidelity.to_string());
        kv("dtw_mean", p.dtw_mean.to_string());
        kv("mpjpe_mean", p.mpjpe_mean.to_string());
        for (name, stat) in self.classification.summary() {
            kv(&format!("{name}_mean"), stat.mean.to_string());
            kv(&format!("{name}_std"), stat.std.to_string());
        }
        out
    }
}
