//! Derivation of velocities, foot contacts, and world-frame positions.

use super::rot6d::{apply, yaw_rotation};
use super::{MotionFrame, MotionSequence, Skeleton, IDENTITY_ROT6D, UP_AXIS};
use crate::error::{Error, Result};

/// First differences of positions; frame 0 copies frame 1 so the tensor
/// width stays uniform.
pub fn velocities_from_positions(positions: &[Vec<[f64; 3]>]) -> Vec<Vec<[f64; 3]>> {
    let frames = positions.len();
    let joints = positions[0].len();
    let mut vel = vec![vec![[0.0; 3]; joints]; frames];
    for f in 1..frames {
        for j in 0..joints {
            for a in 0..3 {
                vel[f][j][a] = positions[f][j][a] - positions[f - 1][j][a];
            }
        }
    }
    if frames > 1 {
        vel[0] = vel[1].clone();
    }
    vel
}

/// Build a [`MotionSequence`] from raw joint positions.
///
/// Velocities are first differences. A foot joint is flagged as in contact
/// at a frame when its speed is below `contact_vel_threshold` (m/frame) and
/// its height above the ground plane is below `contact_height_threshold`
/// (m). Rotations are filled with the identity encoding; callers that know
/// actual joint rotations should overwrite them.
pub fn derive_velocities_and_contacts(
    positions: &[Vec<[f64; 3]>],
    skeleton: &Skeleton,
    contact_vel_threshold: f64,
    contact_height_threshold: f64,
    frame_rate: f64,
) -> Result<MotionSequence> {
    if positions.len() < 2 {
        return Err(Error::TooShort {
            need: 2,
            got: positions.len(),
        });
    }
    for (f, frame) in positions.iter().enumerate() {
        if frame.len() != skeleton.joint_count {
            return Err(Error::ShapeMismatch(format!(
                "frame {f} has {} joints, skeleton has {}",
                frame.len(),
                skeleton.joint_count
            )));
        }
        if frame.iter().any(|p| p.iter().any(|v| !v.is_finite())) {
            return Err(Error::ShapeMismatch(format!(
                "frame {f} contains non-finite positions"
            )));
        }
    }

    let velocities = velocities_from_positions(positions);
    let frames = positions
        .iter()
        .zip(velocities.iter())
        .map(|(pos, vel)| {
            let mut contacts = [0.0; 4];
            for (k, &fj) in skeleton.foot_joint_ids.iter().enumerate() {
                let speed = (vel[fj][0] * vel[fj][0]
                    + vel[fj][1] * vel[fj][1]
                    + vel[fj][2] * vel[fj][2])
                    .sqrt();
                let height = pos[fj][UP_AXIS];
                if speed < contact_vel_threshold && height < contact_height_threshold {
                    contacts[k] = 1.0;
                }
            }
            MotionFrame {
                positions_world: pos.clone(),
                velocities_world: vel.clone(),
                rotations_6d: vec![IDENTITY_ROT6D; skeleton.joint_count],
                foot_contacts: contacts,
            }
        })
        .collect();
    MotionSequence::new(frames, frame_rate)
}

/// Integrate root-relative poses into world-frame positions.
///
/// The root trajectory is integrated from frame 0: heading accumulates the
/// per-frame yaw velocity and the ground-plane offset accumulates the
/// per-frame linear velocity, so the world pose at frame 0 equals the local
/// pose. The 2D linear velocity maps to the (x, z) ground plane.
pub fn relative_to_world(
    local_positions: &[Vec<[f64; 3]>],
    root_linear_vel: &[[f64; 2]],
    root_yaw_vel: &[f64],
) -> Result<Vec<Vec<[f64; 3]>>> {
    let frames = local_positions.len();
    if root_linear_vel.len() != frames || root_yaw_vel.len() != frames {
        return Err(Error::ShapeMismatch(format!(
            "{} pose frames vs {} linear and {} yaw velocity frames",
            frames,
            root_linear_vel.len(),
            root_yaw_vel.len()
        )));
    }
    let finite = local_positions
        .iter()
        .flatten()
        .flatten()
        .chain(root_linear_vel.iter().flatten())
        .chain(root_yaw_vel.iter())
        .all(|v| v.is_finite());
    if !finite {
        return Err(Error::ShapeMismatch("non-finite input".into()));
    }

    let mut heading = 0.0;
    let mut offset = [0.0f64; 2];
    let mut out = Vec::with_capacity(frames);
    for (f, local) in local_positions.iter().enumerate() {
        if f > 0 {
            heading += root_yaw_vel[f];
            offset[0] += root_linear_vel[f][0];
            offset[1] += root_linear_vel[f][1];
        }
        let rot = yaw_rotation(heading);
        out.push(
            local
                .iter()
                .map(|p| {
                    let r = apply(&rot, p);
                    [r[0] + offset[0], r[1], r[2] + offset[1]]
                })
                .collect(),
        );
    }
    Ok(out)
}
