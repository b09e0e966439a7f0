//! A small synthetic corpus: one two-channel joint swinging sinusoidally.
//!
//! Classes share one tempo and differ in amplitude and lean. The tempo is
//! about a fifth of a cycle per frame, close to the band the default
//! post-generation smoothing passes, so generated clips and real clips of a
//! class land near each other in feature space.
//!
//! The lean sits on the outer (Z) rotation only. It turns the whole
//! trajectory rigidly, so it leaves every feature unchanged while keeping
//! the classes far apart in raw channel space.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::bvh::{Channel, Joint, Label, MotionClip, Skeleton};
use crate::seed::{hash_str, rng_for};

pub const TOY_FRAME_TIME: f64 = 0.1;

/// Per-class motion parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToyStyle {
    /// Base frequency in Hz.
    pub frequency: f64,
    /// Amplitude in degrees.
    pub amplitude: f64,
    /// Constant offset of the Z channel, in degrees.
    pub lean: f64,
}

pub fn toy_style(label: &Label) -> ToyStyle {
    match label {
        Label::Angry => ToyStyle { frequency: 2.0, amplitude: 50.0, lean: 90.0 },
        Label::Depressed => ToyStyle { frequency: 2.0, amplitude: 12.0, lean: -90.0 },
        Label::Neutral => ToyStyle { frequency: 2.0, amplitude: 20.0, lean: -40.0 },
        Label::Proud => ToyStyle { frequency: 2.0, amplitude: 32.0, lean: 10.0 },
        Label::Other(_) => ToyStyle { frequency: 2.0, amplitude: 15.0, lean: 0.0 },
    }
}

pub fn toy_classes() -> [Label; 4] {
    [Label::Angry, Label::Depressed, Label::Neutral, Label::Proud]
}

/// Root joint `Hips` with Z and X rotation channels and one end site.
pub fn toy_skeleton() -> Skeleton {
    let root = Joint::new("Hips", [0.0; 3], vec![Channel::Zrotation, Channel::Xrotation])
        .with_child(Joint::end_site("Hips", [0.0, 10.0, 0.0]));
    Skeleton::new(root)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToySpec {
    pub clips_per_class: usize,
    pub frames: usize,
    /// Relative spread of per-clip frequency.
    pub frequency_jitter: f64,
    /// Relative spread of per-clip amplitude.
    pub amplitude_jitter: f64,
    /// Per-frame Gaussian noise in degrees.
    pub noise: f64,
    pub frame_time: f64,
    /// Multiplies every class frequency.
    pub tempo: f64,
}

impl Default for ToySpec {
    fn default() -> Self {
        ToySpec { clips_per_class: 8, frames: 300, frequency_jitter: 0.2, amplitude_jitter: 0.1, noise: 0.1, frame_time: TOY_FRAME_TIME, tempo: 1.0 }
    }
}

pub fn toy_clip<R: Rng>(label: &Label, spec: &ToySpec, rng: &mut R) -> MotionClip {
    let style = toy_style(label);
    let mut vary = |x: f64, j: f64| x * (1.0 + rng.gen_range(-j..=j));
    let f = vary(style.frequency * spec.tempo, spec.frequency_jitter);
    let a = vary(style.amplitude, spec.amplitude_jitter);
    let phase = rng.gen_range(0.0..std::f64::consts::TAU);
    let noise = Normal::new(0.0, spec.noise.max(0.0)).expect("finite noise");
    let frames = (0..spec.frames)
        .map(|i| {
            let t = i as f64 * spec.frame_time;
            let angle = std::f64::consts::TAU * f * t + phase;
            // The second channel lags a quarter turn, so each clip traces an ellipse.
            let z = style.lean + a * angle.sin();
            let x = 0.5 * a * angle.cos();
            vec![z + noise.sample(rng), x + noise.sample(rng)]
        })
        .collect();
    MotionClip::new(spec.frame_time, frames).with_label(label.clone())
}

/// `clips_per_class` clips for each of the four toy classes, with source ids
/// `{label}_{index:02}`. Each clip has its own stream.
pub fn toy_corpus(seed: u64, spec: &ToySpec) -> Vec<MotionClip> {
    toy_classes()
        .iter()
        .flat_map(|label| {
            (0..spec.clips_per_class).map(move |i| {
                let mut rng = rng_for(seed, &[hash_str(label.as_str()), i as u64]);
                toy_clip(label, spec, &mut rng).with_source(format!("{label}_{i:02}"))
            })
        })
        .collect()
}
