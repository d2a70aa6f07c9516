//! Flat per-frame feature tensor consumed by the diffusion stack.
//!
//! Layout per frame, for `J` joints: positions (`3J`), velocities (`3J`),
//! 6D rotations (`6J`), foot contacts (4). Width `12J + 4`, which is 268
//! for the default 22-joint skeleton.

use super::rot6d::{matrix_to_rot6d, rot6d_to_matrix};
use super::{MotionFrame, MotionSequence, IDENTITY_ROT6D};
use crate::autodiff::Mat;
use crate::error::{Error, Result};

pub fn feature_width(joint_count: usize) -> usize {
    12 * joint_count + 4
}

/// Per-frame feature rows, row-major, `frame_count × width`.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionTensor {
    pub values: Vec<f64>,
    pub frame_count: usize,
    pub width: usize,
}

impl MotionTensor {
    pub fn zeros(frame_count: usize, width: usize) -> Self {
        MotionTensor {
            values: vec![0.0; frame_count * width],
            frame_count,
            width,
        }
    }

    pub fn from_mat(m: &Mat) -> Self {
        MotionTensor {
            values: m.data.clone(),
            frame_count: m.rows,
            width: m.cols,
        }
    }

    pub fn to_mat(&self) -> Mat {
        Mat::from_vec(self.frame_count, self.width, self.values.clone())
    }

    /// Number of joints implied by the width, if the width is well-formed.
    pub fn joint_count(&self) -> Result<usize> {
        if self.width < 4 || (self.width - 4) % 12 != 0 {
            return Err(Error::InvalidShape(format!(
                "width {} does not match 12·J + 4",
                self.width
            )));
        }
        Ok((self.width - 4) / 12)
    }

    #[inline]
    pub fn row(&self, f: usize) -> &[f64] {
        &self.values[f * self.width..(f + 1) * self.width]
    }

    pub fn position(&self, f: usize, j: usize) -> [f64; 3] {
        let r = self.row(f);
        [r[3 * j], r[3 * j + 1], r[3 * j + 2]]
    }

    pub fn velocity(&self, f: usize, j: usize) -> [f64; 3] {
        let joints = (self.width - 4) / 12;
        let base = 3 * joints + 3 * j;
        let r = self.row(f);
        [r[base], r[base + 1], r[base + 2]]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Exact inverse of [`MotionSequence::to_tensor`]; the round trip is
    /// bit-exact because both directions are plain copies.
    pub fn to_sequence_exact(&self, frame_rate: f64) -> Result<MotionSequence> {
        let joints = self.joint_count()?;
        let mut frames = Vec::with_capacity(self.frame_count);
        for f in 0..self.frame_count {
            let row = self.row(f);
            let mut frame = MotionFrame {
                positions_world: Vec::with_capacity(joints),
                velocities_world: Vec::with_capacity(joints),
                rotations_6d: Vec::with_capacity(joints),
                foot_contacts: [0.0; 4],
            };
            for j in 0..joints {
                frame
                    .positions_world
                    .push([row[3 * j], row[3 * j + 1], row[3 * j + 2]]);
                let vb = 3 * joints + 3 * j;
                frame
                    .velocities_world
                    .push([row[vb], row[vb + 1], row[vb + 2]]);
                let rb = 6 * joints + 6 * j;
                frame.rotations_6d.push([
                    row[rb],
                    row[rb + 1],
                    row[rb + 2],
                    row[rb + 3],
                    row[rb + 4],
                    row[rb + 5],
                ]);
            }
            frame.foot_contacts.copy_from_slice(&row[12 * joints..12 * joints + 4]);
            frames.push(frame);
        }
        MotionSequence::new(frames, frame_rate)
    }

    /// Convert a generated tensor into a sequence that satisfies the motion
    /// invariants: velocities are recomputed from positions, rotations are
    /// re-orthonormalized (identity fallback for degenerate rows), and
    /// contact channels are binarized at 0.5.
    pub fn to_sequence_sanitized(&self, frame_rate: f64) -> Result<MotionSequence> {
        let raw = self.to_sequence_exact(frame_rate)?;
        let positions: Vec<Vec<[f64; 3]>> =
            raw.frames.iter().map(|f| f.positions_world.clone()).collect();
        let velocities = super::velocities_from_positions(&positions);
        let frames = raw
            .frames
            .into_iter()
            .enumerate()
            .map(|(f, mut frame)| {
                frame.velocities_world = velocities[f].clone();
                for rot in &mut frame.rotations_6d {
                    *rot = match rot6d_to_matrix(rot) {
                        Ok(m) => matrix_to_rot6d(&m),
                        Err(_) => IDENTITY_ROT6D,
                    };
                }
                for c in &mut frame.foot_contacts {
                    *c = if *c >= 0.5 { 1.0 } else { 0.0 };
                }
                frame
            })
            .collect();
        MotionSequence::new(frames, frame_rate)
    }
}

pub(super) fn sequence_to_tensor(seq: &MotionSequence) -> MotionTensor {
    let joints = seq.joint_count();
    let width = feature_width(joints);
    let mut values = Vec::with_capacity(seq.frame_count() * width);
    for frame in &seq.frames {
        for p in &frame.positions_world {
            values.extend_from_slice(p);
        }
        for v in &frame.velocities_world {
            values.extend_from_slice(v);
        }
        for r in &frame.rotations_6d {
            values.extend_from_slice(r);
        }
        values.extend_from_slice(&frame.foot_contacts);
    }
    MotionTensor {
        values,
        frame_count: seq.frame_count(),
        width,
    }
}
