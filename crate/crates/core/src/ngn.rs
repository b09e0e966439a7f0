//! Neural gas network: rank-based vector quantization of pose frames, and
//! frame-conditioned synthesis of new clips from the trained prototypes.
//!
//! Every neuron moves toward each presented frame `v` by
//! `ε_t · exp(-rank(v, i) / λ_t) · (v - w_i)`, where `rank(v, i)` counts the
//! neurons strictly closer to `v` than neuron `i`. Both `ε_t` and `λ_t` decay
//! geometrically from their initial to final values over the run.

use std::collections::BTreeMap;
use std::io;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bvh::{Label, MotionClip, Provenance};
use crate::motion::{self, MotionError, StandardizationModel};
use crate::seed::{derive_seed, hash_str, rng_for};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NgnError {
    #[error("no training frames")]
    EmptyInput,
    #[error("expected {expected} channels, found {found}")]
    MixedChannelCounts { expected: usize, found: usize },
    #[error("vector lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("column {column}: lower bound {min} exceeds upper bound {max}")]
    InvalidBounds { column: usize, min: f64, max: f64 },
    #[error("schedule endpoints must be positive, got {start} -> {end}")]
    NonPositiveRate { start: f64, end: f64 },
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("no references or model for class `{0}`")]
    MissingClass(Label),
    #[error("unsupported field artifact: {0}")]
    Artifact(String),
    #[error(transparent)]
    Motion(#[from] MotionError),
}

pub type Result<T> = std::result::Result<T, NgnError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub neuron_count: usize,
    pub iterations: usize,
    pub epsilon_initial: f64,
    pub epsilon_final: f64,
    pub lambda_initial: f64,
    pub lambda_final: f64,
    /// Standard deviation of generation noise, in standardized units.
    pub noise_std: f64,
    pub samples_per_class: usize,
    /// Post-generation smoothing, in frames.
    pub smoothing_sigma: f64,
    pub seed: u64,
    /// Relative per-iteration improvement below which training is converged.
    pub convergence_tol: f64,
    /// Halt at the convergence iteration instead of running all iterations.
    pub early_stop: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            neuron_count: 50,
            iterations: 50,
            epsilon_initial: 0.3,
            epsilon_final: 0.05,
            lambda_initial: 10.0,
            lambda_final: 0.1,
            noise_std: 3.0,
            samples_per_class: 10,
            smoothing_sigma: 2.0,
            seed: 0,
            convergence_tol: 1e-3,
            early_stop: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(NgnError::InvalidConfig(m.to_owned()));
        if self.neuron_count == 0 {
            return bad("neuron_count must be at least 1");
        }
        if self.iterations == 0 {
            return bad("iterations must be at least 1");
        }
        if !(self.epsilon_final > 0.0 && self.lambda_final > 0.0) {
            return bad("epsilon and lambda must be positive");
        }
        if self.epsilon_final > self.epsilon_initial {
            return bad("epsilon_final must not exceed epsilon_initial");
        }
        if self.lambda_final > self.lambda_initial {
            return bad("lambda_final must not exceed lambda_initial");
        }
        if !(self.noise_std >= 0.0) || !(self.smoothing_sigma >= 0.0) {
            return bad("noise_std and smoothing_sigma must be non-negative");
        }
        Ok(())
    }
}

/// A trained network for one class, in standardized channel space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeuronField {
    pub weights: Vec<Vec<f64>>,
    pub class_label: Label,
    pub error_history: Vec<f64>,
    pub converged_at: Option<usize>,
    pub config: TrainConfig,
}

impl NeuronField {
    pub fn channel_count(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }

    /// CSV with columns `iteration,error`.
    pub fn write_error_csv<W: io::Write>(&self, writer: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["iteration", "error"])?;
        for (i, e) in self.error_history.iter().enumerate() {
            w.write_record(&[i.to_string(), e.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Uniform random weights inside the per-column `(min, max)` bounds.
pub fn init_neurons(seed: u64, neuron_count: usize, bounds: &[(f64, f64)]) -> Result<Vec<Vec<f64>>> {
    if neuron_count == 0 || bounds.is_empty() {
        return Err(NgnError::EmptyInput);
    }
    for (column, &(min, max)) in bounds.iter().enumerate() {
        if !(min <= max) || !min.is_finite() || !max.is_finite() {
            return Err(NgnError::InvalidBounds { column, min, max });
        }
    }
    let mut rng = rng_for(seed, &[]);
    Ok((0..neuron_count)
        .map(|_| {
            bounds
                .iter()
                .map(|&(min, max)| if min == max { min } else { rng.gen_range(min..=max) })
                .collect()
        })
        .collect())
}

fn distance(v: &[f64], w: &[f64]) -> f64 {
    v.iter()
        .zip(w)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Euclidean distance between a frame and a neuron over all channels.
pub fn frame_distance(v: &[f64], w: &[f64]) -> Result<f64> {
    if v.len() != w.len() {
        return Err(NgnError::LengthMismatch {
            left: v.len(),
            right: w.len(),
        });
    }
    Ok(distance(v, w))
}

/// Reusable buffers for ranking without per-frame allocation.
#[derive(Default)]
struct RankScratch {
    dist: Vec<f64>,
    order: Vec<usize>,
    rank: Vec<usize>,
}

impl RankScratch {
    fn compute(&mut self, v: &[f64], weights: &[Vec<f64>]) {
        let n = weights.len();
        self.dist.clear();
        self.dist.extend(weights.iter().map(|w| distance(v, w)));
        self.order.clear();
        self.order.extend(0..n);
        let dist = &self.dist;
        self.order
            .sort_unstable_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b)));
        self.rank.clear();
        self.rank.resize(n, 0);
        let mut group_start = 0;
        for pos in 0..n {
            let i = self.order[pos];
            if pos > 0 && dist[i] > dist[self.order[pos - 1]] {
                group_start = pos;
            }
            self.rank[i] = group_start;
        }
    }
}

/// Number of neurons strictly closer to `v` than each neuron. Tied neurons
/// share a rank.
pub fn rank_neurons(v: &[f64], weights: &[Vec<f64>]) -> Vec<usize> {
    let mut s = RankScratch::default();
    s.compute(v, weights);
    s.rank
}

/// Geometric decay from `start` at `t = 0` to `end` at `t = total - 1`.
pub fn schedule(t: usize, total: usize, start: f64, end: f64) -> Result<f64> {
    if !(start > 0.0 && end > 0.0) {
        return Err(NgnError::NonPositiveRate { start, end });
    }
    if total <= 1 || t == 0 {
        return Ok(start);
    }
    if t >= total - 1 {
        return Ok(end);
    }
    let frac = t as f64 / (total - 1) as f64;
    Ok(start * (end / start).powf(frac))
}

fn apply_update(weights: &mut [Vec<f64>], v: &[f64], epsilon: f64, lambda: f64, scratch: &mut RankScratch) {
    scratch.compute(v, weights);
    for (w, &rank) in weights.iter_mut().zip(&scratch.rank) {
        let step = epsilon * (-(rank as f64) / lambda).exp();
        for (wi, vi) in w.iter_mut().zip(v) {
            *wi += step * (vi - *wi);
        }
    }
}

/// Move every neuron toward `v` by its rank-weighted step. Ranks are taken
/// against the weights before the update.
pub fn update_step(weights: &mut [Vec<f64>], v: &[f64], epsilon: f64, lambda: f64) -> Result<()> {
    if !(epsilon >= 0.0 && lambda > 0.0) {
        return Err(NgnError::NonPositiveRate {
            start: epsilon,
            end: lambda,
        });
    }
    if let Some(w) = weights.iter().find(|w| w.len() != v.len()) {
        return Err(NgnError::LengthMismatch {
            left: v.len(),
            right: w.len(),
        });
    }
    apply_update(weights, v, epsilon, lambda, &mut RankScratch::default());
    Ok(())
}

fn nearest(v: &[f64], weights: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, w) in weights.iter().enumerate() {
        let d = distance(v, w);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

/// Mean over frames of the distance to the closest neuron.
pub fn average_error<R: AsRef<[f64]> + Sync>(weights: &[Vec<f64>], frames: &[R]) -> Result<f64> {
    if weights.is_empty() || frames.is_empty() {
        return Err(NgnError::EmptyInput);
    }
    let width = weights[0].len();
    if let Some(f) = frames.iter().find(|f| f.as_ref().len() != width) {
        return Err(NgnError::LengthMismatch {
            left: f.as_ref().len(),
            right: width,
        });
    }
    let mins: Vec<f64> = frames
        .par_iter()
        .map(|f| nearest(f.as_ref(), weights).1)
        .collect();
    Ok(mins.iter().sum::<f64>() / frames.len() as f64)
}

const INIT_STREAM: u64 = 1;
const SHUFFLE_STREAM: u64 = 2;

/// Train one class's network on its (already standardized) clips.
///
/// One iteration is a shuffled pass over every pooled frame. The average
/// quantization error is recorded after each iteration; `converged_at` is
/// the first iteration whose relative improvement falls below
/// `convergence_tol`.
pub fn train(clips: &[MotionClip], config: &TrainConfig) -> Result<NeuronField> {
    config.validate()?;
    let frames: Vec<&[f64]> = clips
        .iter()
        .flat_map(|c| c.frames.iter().map(Vec::as_slice))
        .collect();
    let width = frames.first().map(|f| f.len()).ok_or(NgnError::EmptyInput)?;
    if width == 0 {
        return Err(NgnError::EmptyInput);
    }
    if let Some(f) = frames.iter().find(|f| f.len() != width) {
        return Err(NgnError::MixedChannelCounts {
            expected: width,
            found: f.len(),
        });
    }

    let mut bounds = vec![(f64::INFINITY, f64::NEG_INFINITY); width];
    for f in &frames {
        for (b, &x) in bounds.iter_mut().zip(*f) {
            b.0 = b.0.min(x);
            b.1 = b.1.max(x);
        }
    }
    let mut weights = init_neurons(
        derive_seed(config.seed, &[INIT_STREAM]),
        config.neuron_count,
        &bounds,
    )?;

    let mut rng = rng_for(config.seed, &[SHUFFLE_STREAM]);
    let mut order: Vec<usize> = (0..frames.len()).collect();
    let mut scratch = RankScratch::default();
    let mut error_history = Vec::with_capacity(config.iterations);
    let mut converged_at = None;

    for t in 0..config.iterations {
        let epsilon = schedule(t, config.iterations, config.epsilon_initial, config.epsilon_final)?;
        let lambda = schedule(t, config.iterations, config.lambda_initial, config.lambda_final)?;
        order.shuffle(&mut rng);
        for &i in &order {
            apply_update(&mut weights, frames[i], epsilon, lambda, &mut scratch);
        }

        let err = average_error(&weights, &frames)?;
        if let Some(&prev) = error_history.last() {
            let improvement = if prev > 0.0 { (prev - err) / prev } else { 0.0 };
            if converged_at.is_none() && improvement < config.convergence_tol {
                converged_at = Some(t);
            }
        }
        error_history.push(err);
        if config.early_stop && converged_at.is_some() {
            break;
        }
    }

    Ok(NeuronField {
        weights,
        class_label: clips[0].label.clone(),
        error_history,
        converged_at,
        config: config.clone(),
    })
}

/// Closest neuron to `reference` (lowest index on ties) plus i.i.d.
/// `N(0, σ²)` noise on every channel.
pub fn generate_frame<R: Rng + ?Sized>(
    reference: &[f64],
    field: &NeuronField,
    sigma: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if field.weights.is_empty() {
        return Err(NgnError::EmptyInput);
    }
    if reference.len() != field.channel_count() {
        return Err(NgnError::LengthMismatch {
            left: reference.len(),
            right: field.channel_count(),
        });
    }
    let (closest, _) = nearest(reference, &field.weights);
    let mut frame = field.weights[closest].clone();
    if sigma > 0.0 {
        let noise = Normal::new(0.0, sigma)
            .map_err(|_| NgnError::InvalidConfig(format!("bad noise std {sigma}")))?;
        for x in &mut frame {
            *x += noise.sample(rng);
        }
    }
    Ok(frame)
}

/// Synthesize a clip frame by frame from a standardized reference, smooth
/// it, and map it back to channel units.
pub fn generate_clip<R: Rng + ?Sized>(
    reference: &MotionClip,
    field: &NeuronField,
    model: &StandardizationModel,
    rng: &mut R,
) -> Result<MotionClip> {
    let width = field.channel_count();
    if let Some(r) = reference.frames.iter().find(|r| r.len() != width) {
        return Err(NgnError::MixedChannelCounts {
            expected: width,
            found: r.len(),
        });
    }
    let frames = reference
        .frames
        .iter()
        .map(|r| generate_frame(r, field, field.config.noise_std, rng))
        .collect::<Result<Vec<_>>>()?;
    let raw = reference.with_frames(frames);
    let smoothed = motion::gaussian_smooth(&raw, field.config.smoothing_sigma);
    let mut out = model.inverse_standardize(&smoothed)?;
    out.provenance = Provenance::Synthetic;
    out.label = field.class_label.clone();
    out.frame_time = reference.frame_time;
    Ok(out)
}

/// A trained field together with the standardization it was trained under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassModel {
    pub field: NeuronField,
    pub standardization: StandardizationModel,
}

impl ClassModel {
    /// Fit standardization on `clips` (raw channel units), then train.
    pub fn train(clips: &[MotionClip], config: &TrainConfig) -> Result<Self> {
        let standardization = motion::fit_standardization(clips)?;
        let standardized = clips
            .iter()
            .map(|c| standardization.standardize(c))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let field = train(&standardized, config)?;
        Ok(ClassModel {
            field,
            standardization,
        })
    }

    /// Generate from a reference clip in raw channel units.
    pub fn generate<R: Rng + ?Sized>(&self, reference: &MotionClip, rng: &mut R) -> Result<MotionClip> {
        let standardized = self.standardization.standardize(reference)?;
        generate_clip(&standardized, &self.field, &self.standardization, rng)
    }
}

const ARTIFACT_FORMAT: &str = "ngn-motion-field";
const ARTIFACT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct FieldArtifact {
    format: String,
    version: u32,
    #[serde(flatten)]
    model: ClassModel,
}

impl ClassModel {
    /// Versioned JSON document.
    pub fn to_json(&self) -> String {
        let artifact = FieldArtifact {
            format: ARTIFACT_FORMAT.to_owned(),
            version: ARTIFACT_VERSION,
            model: self.clone(),
        };
        serde_json::to_string_pretty(&artifact).expect("field artifact always serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let artifact: FieldArtifact =
            serde_json::from_str(text).map_err(|e| NgnError::Artifact(e.to_string()))?;
        if artifact.format != ARTIFACT_FORMAT || artifact.version != ARTIFACT_VERSION {
            return Err(NgnError::Artifact(format!(
                "{} v{}",
                artifact.format, artifact.version
            )));
        }
        Ok(artifact.model)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedClip {
    pub clip: MotionClip,
    /// Position of the reference within its class's reference list.
    pub reference_index: usize,
    pub reference_id: String,
    pub seed: u64,
}

/// `n_per_class` clips per class, cycling round-robin over each class's
/// references (raw channel units). Each clip draws noise from its own
/// stream derived from `(seed, class, clip index)`.
pub fn generate_dataset(
    models: &BTreeMap<Label, ClassModel>,
    references: &BTreeMap<Label, Vec<MotionClip>>,
    n_per_class: usize,
    seed: u64,
) -> Result<Vec<GeneratedClip>> {
    let mut jobs = Vec::new();
    for (label, model) in models {
        let refs = references
            .get(label)
            .filter(|r| !r.is_empty())
            .ok_or_else(|| NgnError::MissingClass(label.clone()))?;
        for i in 0..n_per_class {
            jobs.push((label, model, refs, i));
        }
    }
    jobs.into_par_iter()
        .map(|(label, model, refs, i)| {
            let reference_index = i % refs.len();
            let reference = &refs[reference_index];
            let clip_seed = derive_seed(seed, &[hash_str(label.as_str()), i as u64]);
            let mut rng = rng_for(clip_seed, &[]);
            let clip = model
                .generate(reference, &mut rng)?
                .with_source(format!("{label}_syn_{i:03}"));
            Ok(GeneratedClip {
                clip,
                reference_index,
                reference_id: reference.source_id.clone(),
                seed: clip_seed,
            })
        })
        .collect()
}
