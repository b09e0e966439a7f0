//! Kinematic descriptors of a clip, fused into one row per clip.
//!
//! Linear derivatives (velocity, acceleration, jerk) and the spatial path are
//! measured on forward-kinematics joint positions. Angular velocity, range of
//! motion and harmonics are measured on the rotation channels directly. All
//! derivatives are forward differences.

use std::io;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bvh::{Label, MotionClip, Provenance, Skeleton};
use crate::motion::{self, JointPositions, MotionError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FeatureError {
    #[error("need at least {needed} frames, found {found}")]
    TooFewFrames { needed: usize, found: usize },
    #[error(transparent)]
    Motion(#[from] MotionError),
}

pub type Result<T> = std::result::Result<T, FeatureError>;

/// Harmonic bins averaged by [`harmonics_magnitude`].
pub const HARMONIC_BAND: std::ops::RangeInclusive<usize> = 1..=5;

pub const FEATURE_NAMES: [&str; 7] = [
    "velocity_mean",
    "acceleration_mean",
    "jerk_mean",
    "angular_velocity_mean",
    "range_of_motion",
    "spatial_path",
    "harmonics_magnitude",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub velocity_mean: f64,
    pub acceleration_mean: f64,
    pub jerk_mean: f64,
    pub angular_velocity_mean: f64,
    pub range_of_motion: f64,
    pub spatial_path: f64,
    pub harmonics_magnitude: f64,
    pub label: Label,
    pub provenance: Provenance,
}

impl FeatureVector {
    /// Values in [`FEATURE_NAMES`] order.
    pub fn values(&self) -> [f64; 7] {
        [
            self.velocity_mean,
            self.acceleration_mean,
            self.jerk_mean,
            self.angular_velocity_mean,
            self.range_of_motion,
            self.spatial_path,
            self.harmonics_magnitude,
        ]
    }
}

fn need(found: usize, needed: usize) -> Result<()> {
    if found < needed {
        Err(FeatureError::TooFewFrames { needed, found })
    } else {
        Ok(())
    }
}

fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// `order`-th forward difference magnitude per joint, scaled by `dt^order`.
fn difference_magnitudes(positions: &JointPositions, frame_time: f64, order: usize) -> Result<Vec<Vec<f64>>> {
    need(positions.positions.len(), order + 1)?;
    // Repeated first differences, so constant stretches stay exactly zero.
    let mut frames = positions.positions.clone();
    for _ in 0..order {
        frames = frames
            .windows(2)
            .map(|w| {
                w[0].iter()
                    .zip(&w[1])
                    .map(|(a, b)| [b[0] - a[0], b[1] - a[1], b[2] - a[2]])
                    .collect()
            })
            .collect();
    }
    let scale = frame_time.powi(order as i32);
    Ok(frames
        .iter()
        .map(|row| row.iter().map(|d| norm(*d) / scale).collect())
        .collect())
}

/// Joint speed per frame step, `(F-1) × J`.
pub fn velocity(positions: &JointPositions, frame_time: f64) -> Result<Vec<Vec<f64>>> {
    difference_magnitudes(positions, frame_time, 1)
}

/// Second-difference magnitude per joint, `(F-2) × J`.
pub fn acceleration(positions: &JointPositions, frame_time: f64) -> Result<Vec<Vec<f64>>> {
    difference_magnitudes(positions, frame_time, 2)
}

/// Third-difference magnitude per joint, `(F-3) × J`.
pub fn jerk(positions: &JointPositions, frame_time: f64) -> Result<Vec<Vec<f64>>> {
    difference_magnitudes(positions, frame_time, 3)
}

fn rotation_series(skeleton: &Skeleton, clip: &MotionClip) -> Vec<Vec<f64>> {
    skeleton
        .rotation_columns()
        .into_iter()
        .map(|c| clip.frames.iter().map(|r| r[c]).collect())
        .collect()
}

/// Absolute rotation rate in degrees per second, one column per rotation
/// channel. Angles are unwrapped first, so a 359° → 1° step counts as 2°.
pub fn angular_velocity(skeleton: &Skeleton, clip: &MotionClip) -> Result<Vec<Vec<f64>>> {
    need(clip.frames.len(), 2)?;
    let series: Vec<Vec<f64>> = rotation_series(skeleton, clip)
        .into_iter()
        .map(|mut s| {
            motion::unwrap_series(&mut s);
            s
        })
        .collect();
    Ok((0..clip.frames.len() - 1)
        .map(|f| {
            series
                .iter()
                .map(|s| (s[f + 1] - s[f]).abs() / clip.frame_time)
                .collect()
        })
        .collect())
}

/// Mean over rotation channels of each channel's max − min, in degrees.
pub fn range_of_motion(skeleton: &Skeleton, clip: &MotionClip) -> f64 {
    let series = rotation_series(skeleton, clip);
    mean(series.iter().map(|s| {
        let (lo, hi) = s
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        if s.is_empty() {
            0.0
        } else {
            hi - lo
        }
    }))
}

/// Mean over joints of the total arc length each joint travels.
pub fn spatial_path(positions: &JointPositions) -> Result<f64> {
    let steps = velocity(positions, 1.0)?;
    let joints = positions.joint_count();
    if joints == 0 {
        return Ok(0.0);
    }
    let total: f64 = steps.iter().flatten().sum();
    Ok(total / joints as f64)
}

/// Mean |DFT| / F over harmonics 1..=5 of one mean-removed series.
pub fn series_harmonics(series: &[f64]) -> f64 {
    let n = series.len();
    let m = mean(series.iter().copied());
    let centered: Vec<f64> = series.iter().map(|x| x - m).collect();
    mean(HARMONIC_BAND.map(|k| {
        let (mut re, mut im) = (0.0, 0.0);
        for (t, x) in centered.iter().enumerate() {
            let phase = -2.0 * std::f64::consts::PI * (k * t % n) as f64 / n as f64;
            re += x * phase.cos();
            im += x * phase.sin();
        }
        (re * re + im * im).sqrt() / n as f64
    }))
}

/// Mean over rotation channels of [`series_harmonics`].
pub fn harmonics_magnitude(skeleton: &Skeleton, clip: &MotionClip) -> Result<f64> {
    need(clip.frames.len(), 8)?;
    Ok(mean(
        rotation_series(skeleton, clip)
            .iter()
            .map(|s| series_harmonics(s)),
    ))
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

fn grand_mean(rows: &[Vec<f64>]) -> f64 {
    mean(rows.iter().flatten().copied())
}

/// Full descriptor for one clip: unwrap, run forward kinematics, then fuse.
pub fn extract_features(skeleton: &Skeleton, clip: &MotionClip) -> Result<FeatureVector> {
    need(clip.frames.len(), 8)?;
    let clip = motion::unwrap_angles(skeleton, clip);
    let positions = motion::forward_kinematics(skeleton, &clip)?;
    let dt = clip.frame_time;
    Ok(FeatureVector {
        velocity_mean: grand_mean(&velocity(&positions, dt)?),
        acceleration_mean: grand_mean(&acceleration(&positions, dt)?),
        jerk_mean: grand_mean(&jerk(&positions, dt)?),
        angular_velocity_mean: grand_mean(&angular_velocity(skeleton, &clip)?),
        range_of_motion: range_of_motion(skeleton, &clip),
        spatial_path: spatial_path(&positions)?,
        harmonics_magnitude: harmonics_magnitude(skeleton, &clip)?,
        label: clip.label.clone(),
        provenance: clip.provenance,
    })
}

/// Feature table with a header row: feature names, then label and provenance.
pub fn write_feature_csv<W: io::Write>(features: &[FeatureVector], writer: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = FEATURE_NAMES.to_vec();
    header.extend(["label", "provenance"]);
    w.write_record(&header)?;
    for f in features {
        let mut row: Vec<String> = f.values().iter().map(|v| v.to_string()).collect();
        row.push(f.label.to_string());
        row.push(f.provenance.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
