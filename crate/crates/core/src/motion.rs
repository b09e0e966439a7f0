//! Clip pre- and post-processing: angle unwrapping, resampling,
//! standardization, Gaussian smoothing and forward kinematics.

use std::io;

use nalgebra::{Matrix3, Rotation3, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bvh::{Channel, MotionClip, Skeleton};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MotionError {
    #[error("need at least {needed} frames, found {found}")]
    TooFewFrames { needed: usize, found: usize },
    #[error("no frames to fit")]
    EmptyInput,
    #[error("expected {expected} channels, found {found}")]
    MixedChannelCounts { expected: usize, found: usize },
}

pub type Result<T> = std::result::Result<T, MotionError>;

pub const STD_FLOOR: f64 = 1e-8;

fn check_width(clip: &MotionClip, expected: usize) -> Result<()> {
    match clip.frames.iter().find(|r| r.len() != expected) {
        Some(r) => Err(MotionError::MixedChannelCounts {
            expected,
            found: r.len(),
        }),
        None => Ok(()),
    }
}

/// Shift each value by multiples of 360 so consecutive steps stay under 180.
pub fn unwrap_series(values: &mut [f64]) {
    for i in 1..values.len() {
        let turns = ((values[i] - values[i - 1]) / 360.0).round();
        values[i] -= 360.0 * turns;
    }
}

/// Unwrap every rotation column of `clip`; position columns are untouched.
pub fn unwrap_angles(skeleton: &Skeleton, clip: &MotionClip) -> MotionClip {
    let mut out = clip.clone();
    for col in skeleton.rotation_columns() {
        let mut series: Vec<f64> = out.frames.iter().map(|r| r[col]).collect();
        unwrap_series(&mut series);
        for (row, v) in out.frames.iter_mut().zip(series) {
            row[col] = v;
        }
    }
    out
}

/// Linearly resample every channel to `target_frames` rows.
///
/// Frame time is scaled so `frames × frame_time` is unchanged.
pub fn resample(clip: &MotionClip, target_frames: usize) -> Result<MotionClip> {
    let n = clip.frames.len();
    if n < 2 {
        return Err(MotionError::TooFewFrames { needed: 2, found: n });
    }
    if target_frames < 2 {
        return Err(MotionError::TooFewFrames {
            needed: 2,
            found: target_frames,
        });
    }
    check_width(clip, clip.channel_count())?;

    let span = (n - 1) as f64;
    let steps = (target_frames - 1) as f64;
    let frames = (0..target_frames)
        .map(|i| {
            let u = (i as f64 * span) / steps;
            let lo = u.floor() as usize;
            if lo >= n - 1 {
                return clip.frames[n - 1].clone();
            }
            let t = u - lo as f64;
            let (a, b) = (&clip.frames[lo], &clip.frames[lo + 1]);
            a.iter().zip(b).map(|(&x, &y)| x + t * (y - x)).collect()
        })
        .collect();

    let mut out = clip.with_frames(frames);
    out.frame_time = clip.frame_time * n as f64 / target_frames as f64;
    Ok(out)
}

/// Per-column mean and population standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizationModel {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

pub fn fit_standardization<'a, I>(clips: I) -> Result<StandardizationModel>
where
    I: IntoIterator<Item = &'a MotionClip>,
{
    let mut width = None;
    let mut count = 0usize;
    let mut sum: Vec<f64> = Vec::new();
    let mut rows: Vec<&[f64]> = Vec::new();
    for clip in clips {
        for row in &clip.frames {
            let expected = *width.get_or_insert(row.len());
            if row.len() != expected {
                return Err(MotionError::MixedChannelCounts {
                    expected,
                    found: row.len(),
                });
            }
            if sum.is_empty() {
                sum = vec![0.0; expected];
            }
            for (s, v) in sum.iter_mut().zip(row) {
                *s += v;
            }
            rows.push(row);
            count += 1;
        }
    }
    if count == 0 || width == Some(0) {
        return Err(MotionError::EmptyInput);
    }

    let mean: Vec<f64> = sum.iter().map(|s| s / count as f64).collect();
    let mut var = vec![0.0; mean.len()];
    for row in rows {
        for ((v, x), m) in var.iter_mut().zip(row).zip(&mean) {
            *v += (x - m) * (x - m);
        }
    }
    let std = var
        .into_iter()
        .map(|v| (v / count as f64).sqrt().max(STD_FLOOR))
        .collect();
    Ok(StandardizationModel { mean, std })
}

impl StandardizationModel {
    pub fn channel_count(&self) -> usize {
        self.mean.len()
    }

    pub fn standardize(&self, clip: &MotionClip) -> Result<MotionClip> {
        check_width(clip, self.channel_count())?;
        Ok(clip.with_frames(
            clip.frames
                .iter()
                .map(|r| self.standardize_row(r))
                .collect(),
        ))
    }

    pub fn inverse_standardize(&self, clip: &MotionClip) -> Result<MotionClip> {
        check_width(clip, self.channel_count())?;
        Ok(clip.with_frames(
            clip.frames
                .iter()
                .map(|r| {
                    r.iter()
                        .zip(self.mean.iter().zip(&self.std))
                        .map(|(x, (m, s))| x * s + m)
                        .collect()
                })
                .collect(),
        ))
    }

    pub fn standardize_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(x, (m, s))| (x - m) / s)
            .collect()
    }
}

/// Convolve every channel with a truncated Gaussian of `sigma_frames`.
///
/// The kernel radius is `ceil(3σ)`; near the clip boundaries the kernel is
/// cut off and renormalised over the taps that remain. `σ <= 0` is the
/// identity.
pub fn gaussian_smooth(clip: &MotionClip, sigma_frames: f64) -> MotionClip {
    if !(sigma_frames > 0.0) || clip.frames.len() < 2 {
        return clip.clone();
    }
    let radius = (3.0 * sigma_frames).ceil() as isize;
    let kernel: Vec<f64> = (-radius..=radius)
        .map(|k| (-((k * k) as f64) / (2.0 * sigma_frames * sigma_frames)).exp())
        .collect();

    let n = clip.frames.len() as isize;
    let width = clip.channel_count();
    let frames = (0..n)
        .map(|i| {
            let lo = (i - radius).max(0);
            let hi = (i + radius).min(n - 1);
            let mut acc = vec![0.0; width];
            let mut norm = 0.0;
            for j in lo..=hi {
                let w = kernel[(j - i + radius) as usize];
                norm += w;
                for (a, v) in acc.iter_mut().zip(&clip.frames[j as usize]) {
                    *a += w * v;
                }
            }
            acc.iter_mut().for_each(|a| *a /= norm);
            acc
        })
        .collect();
    clip.with_frames(frames)
}

/// World-space joint positions, frame-major: `positions[frame][joint]`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPositions {
    pub names: Vec<String>,
    pub positions: Vec<Vec<[f64; 3]>>,
}

impl JointPositions {
    pub fn frame_count(&self) -> usize {
        self.positions.len()
    }

    pub fn joint_count(&self) -> usize {
        self.names.len()
    }

    /// CSV with columns `frame,joint,x,y,z`.
    pub fn write_csv<W: io::Write>(&self, writer: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["frame", "joint", "x", "y", "z"])?;
        for (f, row) in self.positions.iter().enumerate() {
            for (name, p) in self.names.iter().zip(row) {
                w.write_record(&[
                    f.to_string(),
                    name.clone(),
                    p[0].to_string(),
                    p[1].to_string(),
                    p[2].to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn axis_rotation(channel: Channel, degrees: f64) -> Matrix3<f64> {
    let axis = match channel.axis() {
        0 => Vector3::x_axis(),
        1 => Vector3::y_axis(),
        _ => Vector3::z_axis(),
    };
    Rotation3::from_axis_angle(&axis, degrees.to_radians()).into_inner()
}

/// Compose joint transforms root to leaf for every frame.
///
/// Each joint's local transform is its offset plus any position channels,
/// followed by its rotation channels composed intrinsically in declared
/// order. Angles are degrees.
pub fn forward_kinematics(skeleton: &Skeleton, clip: &MotionClip) -> Result<JointPositions> {
    check_width(clip, skeleton.total_channels)?;
    let joints = &skeleton.joint_index;
    let positions = clip
        .frames
        .iter()
        .map(|row| {
            let mut world_rot: Vec<Matrix3<f64>> = Vec::with_capacity(joints.len());
            let mut world_pos: Vec<Vector3<f64>> = Vec::with_capacity(joints.len());
            for joint in joints {
                let mut translation = Vector3::from(joint.offset);
                let mut rotation = Matrix3::identity();
                for (k, &ch) in joint.channels.iter().enumerate() {
                    let value = row[joint.channel_offset + k];
                    if ch.is_rotation() {
                        rotation *= axis_rotation(ch, value);
                    } else {
                        translation[ch.axis()] += value;
                    }
                }
                let (pos, rot) = match joint.parent {
                    Some(p) => (
                        world_pos[p] + world_rot[p] * translation,
                        world_rot[p] * rotation,
                    ),
                    None => (translation, rotation),
                };
                world_pos.push(pos);
                world_rot.push(rot);
            }
            world_pos.iter().map(|p| [p.x, p.y, p.z]).collect()
        })
        .collect();
    Ok(JointPositions {
        names: joints.iter().map(|j| j.name.clone()).collect(),
        positions,
    })
}
