//! Motion representation shared by every other module.
//!
//! A person is a rooted skeleton of 22 joints by default. Per frame we keep
//! world-frame joint positions and velocities (meters, meters/frame), a 6D
//! encoding of each joint's rotation relative to its kinematic parent, and
//! four binary foot-contact flags. The flat numeric form consumed by the
//! diffusion stack is [`MotionTensor`]: per-frame feature rows of width
//! `12·J + 4` (268 for 22 joints) laid out as positions, velocities,
//! rotations, contacts.
//!
//! The up axis is +Y; the ground plane is XZ.

mod derive;
mod io;
mod rot6d;
mod tensor;
mod validate;

pub use derive::{derive_velocities_and_contacts, relative_to_world, velocities_from_positions};
pub use io::{motion_csv_header, read_motion_json, write_motion_csv, write_motion_json};
pub use rot6d::{matrix_to_rot6d, rot6d_to_matrix, yaw_rotation};
pub use tensor::{feature_width, MotionTensor};
pub use validate::{validate_motion, ValidationReport, Violation, ViolationKind};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Index of the vertical axis in world coordinates.
pub const UP_AXIS: usize = 1;

/// Identity rotation in the 6D encoding (first two matrix columns).
pub const IDENTITY_ROT6D: [f64; 6] = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0];

/// Rooted joint tree with template bone lengths and foot-joint markers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skeleton {
    pub joint_count: usize,
    /// Parent joint per joint; the root points at itself.
    pub parent_index: Vec<usize>,
    /// Length of the bone from each joint to its parent, meters. The root
    /// entry is 0 by convention and excluded from validation.
    pub template_bone_lengths: Vec<f64>,
    /// Left heel, right heel, left toe, right toe analogs.
    pub foot_joint_ids: [usize; 4],
}

impl Skeleton {
    pub fn new(
        parent_index: Vec<usize>,
        template_bone_lengths: Vec<f64>,
        foot_joint_ids: [usize; 4],
    ) -> Result<Self> {
        let joint_count = parent_index.len();
        if template_bone_lengths.len() != joint_count {
            return Err(Error::ShapeMismatch(format!(
                "bone length table has {} entries for {} joints",
                template_bone_lengths.len(),
                joint_count
            )));
        }
        let sk = Skeleton {
            joint_count,
            parent_index,
            template_bone_lengths,
            foot_joint_ids,
        };
        sk.check_tree()?;
        Ok(sk)
    }

    pub fn root(&self) -> usize {
        self.parent_index
            .iter()
            .enumerate()
            .find(|(j, p)| *j == **p)
            .map(|(j, _)| j)
            .unwrap_or(0)
    }

    fn check_tree(&self) -> Result<()> {
        let n = self.joint_count;
        if n == 0 {
            return Err(Error::InvalidSpec("skeleton has no joints".into()));
        }
        let roots: Vec<usize> = (0..n).filter(|&j| self.parent_index[j] == j).collect();
        if roots.len() != 1 {
            return Err(Error::InvalidSpec(format!(
                "skeleton must have exactly one root, found {}",
                roots.len()
            )));
        }
        let root = roots[0];
        for j in 0..n {
            if self.parent_index[j] >= n {
                return Err(Error::InvalidSpec(format!(
                    "joint {j} has out-of-range parent {}",
                    self.parent_index[j]
                )));
            }
            // Walk to the root; a cycle would exceed n hops.
            let mut cur = j;
            for _ in 0..=n {
                if cur == root {
                    break;
                }
                cur = self.parent_index[cur];
            }
            if cur != root {
                return Err(Error::InvalidSpec(format!(
                    "joint {j} is not connected to the root"
                )));
            }
            if j != root && self.template_bone_lengths[j] <= 0.0 {
                return Err(Error::InvalidSpec(format!(
                    "bone length for joint {j} must be positive"
                )));
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        for &f in &self.foot_joint_ids {
            if f >= n || !seen.insert(f) {
                return Err(Error::InvalidSpec(
                    "foot joints must be four distinct joint ids".into(),
                ));
            }
            // Leaf or near-leaf: every child (if any) must itself be a leaf.
            let children: Vec<usize> =
                (0..n).filter(|&c| c != f && self.parent_index[c] == f).collect();
            for c in children {
                let grandchildren = (0..n).any(|g| g != c && self.parent_index[g] == c);
                if grandchildren {
                    return Err(Error::InvalidSpec(format!(
                        "foot joint {f} is neither a leaf nor a near-leaf"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Joints that have a parent bone, i.e. everything except the root.
    pub fn bone_children(&self) -> impl Iterator<Item = usize> + '_ {
        let root = self.root();
        (0..self.joint_count).filter(move |&j| j != root)
    }
}

/// One person's state at a single frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionFrame {
    pub positions_world: Vec<[f64; 3]>,
    pub velocities_world: Vec<[f64; 3]>,
    pub rotations_6d: Vec<[f64; 6]>,
    /// Binary flags matching [`Skeleton::foot_joint_ids`] order.
    pub foot_contacts: [f64; 4],
}

impl MotionFrame {
    pub fn joint_count(&self) -> usize {
        self.positions_world.len()
    }
}

/// An ordered frame list for one person.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionSequence {
    pub frames: Vec<MotionFrame>,
    pub frame_rate: f64,
}

impl MotionSequence {
    pub fn new(frames: Vec<MotionFrame>, frame_rate: f64) -> Result<Self> {
        if frames.len() < 2 {
            return Err(Error::TooShort {
                need: 2,
                got: frames.len(),
            });
        }
        let joints = frames[0].joint_count();
        for (i, f) in frames.iter().enumerate() {
            if f.positions_world.len() != joints
                || f.velocities_world.len() != joints
                || f.rotations_6d.len() != joints
            {
                return Err(Error::ShapeMismatch(format!(
                    "frame {i} has inconsistent joint counts"
                )));
            }
        }
        Ok(MotionSequence { frames, frame_rate })
    }

    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    pub fn joint_count(&self) -> usize {
        self.frames[0].joint_count()
    }

    /// Flatten to the numeric tensor form. Lossless; see
    /// [`MotionTensor::to_sequence_exact`] for the inverse.
    pub fn to_tensor(&self) -> MotionTensor {
        tensor::sequence_to_tensor(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_bone_skeleton() -> Skeleton {
        // 0 root, 1 and 2 children of root, 3 child of 1, 4 child of 2.
        Skeleton::new(
            vec![0, 0, 0, 1, 2],
            vec![0.0, 0.5, 0.5, 0.4, 0.4],
            [1, 2, 3, 4],
        )
        .unwrap()
    }

    #[test]
    fn skeleton_accepts_valid_tree() {
        let sk = two_bone_skeleton();
        assert_eq!(sk.root(), 0);
        assert_eq!(sk.bone_children().count(), 4);
    }

    #[test]
    fn skeleton_rejects_two_roots() {
        let err = Skeleton::new(
            vec![0, 1, 0, 1, 2],
            vec![0.0, 0.0, 0.5, 0.4, 0.4],
            [1, 2, 3, 4],
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidSpec(_)));
    }

    #[test]
    fn skeleton_rejects_nonpositive_bone() {
        let err = Skeleton::new(
            vec![0, 0, 0, 1, 2],
            vec![0.0, 0.5, -0.1, 0.4, 0.4],
            [1, 2, 3, 4],
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidSpec(_)));
    }

    #[test]
    fn skeleton_rejects_deep_foot_joint() {
        // Joint 0's child 1 has child 3 which has child 4: joint 1 is not a
        // near-leaf.
        let err = Skeleton::new(
            vec![0, 0, 0, 1, 3],
            vec![0.0, 0.5, 0.5, 0.4, 0.4],
            [1, 2, 3, 4],
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidSpec(_)));
    }

    #[test]
    fn sequence_requires_two_frames() {
        let frame = MotionFrame {
            positions_world: vec![[0.0; 3]; 5],
            velocities_world: vec![[0.0; 3]; 5],
            rotations_6d: vec![IDENTITY_ROT6D; 5],
            foot_contacts: [0.0; 4],
        };
        let err = MotionSequence::new(vec![frame], 10.0).unwrap_err();
        assert!(matches!(err, Error::TooShort { .. }));
    }
}
