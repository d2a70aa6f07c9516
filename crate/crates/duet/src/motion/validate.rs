//! Report-only invariant checking for motion sequences.

use super::rot6d::rot6d_to_matrix;
use super::{MotionSequence, Skeleton};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    TooShort,
    NonFinite,
    VelocityInconsistency,
    DegenerateRotation,
    NonBinaryContact,
    BoneLengthDrift,
    JointCountMismatch,
}

#[derive(Debug, Clone)]
pub struct Violation {
    pub kind: ViolationKind,
    pub frame: Option<usize>,
    pub joint: Option<usize>,
    pub detail: String,
}

/// All invariant violations found in one sequence. Empty means clean.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }

    fn push(&mut self, kind: ViolationKind, frame: Option<usize>, joint: Option<usize>, detail: String) {
        self.violations.push(Violation {
            kind,
            frame,
            joint,
            detail,
        });
    }
}

/// Check every motion invariant without mutating the input: velocity
/// consistency with positions, rotation non-degeneracy, contact binarity,
/// and per-frame bone length drift against the skeleton template.
pub fn validate_motion(m: &MotionSequence, skeleton: &Skeleton, tol: f64) -> ValidationReport {
    let mut report = ValidationReport::default();
    if m.frames.len() < 2 {
        report.push(
            ViolationKind::TooShort,
            None,
            None,
            format!("{} frames, need at least 2", m.frames.len()),
        );
        return report;
    }

    for (f, frame) in m.frames.iter().enumerate() {
        if frame.joint_count() != skeleton.joint_count {
            report.push(
                ViolationKind::JointCountMismatch,
                Some(f),
                None,
                format!(
                    "frame has {} joints, skeleton has {}",
                    frame.joint_count(),
                    skeleton.joint_count
                ),
            );
            continue;
        }
        let finite = frame
            .positions_world
            .iter()
            .chain(frame.velocities_world.iter())
            .flatten()
            .chain(frame.rotations_6d.iter().flatten())
            .chain(frame.foot_contacts.iter())
            .all(|v| v.is_finite());
        if !finite {
            report.push(
                ViolationKind::NonFinite,
                Some(f),
                None,
                "non-finite value".into(),
            );
            continue;
        }

        for (j, rot) in frame.rotations_6d.iter().enumerate() {
            if let Err(e) = rot6d_to_matrix(rot) {
                report.push(
                    ViolationKind::DegenerateRotation,
                    Some(f),
                    Some(j),
                    e.to_string(),
                );
            }
        }
        for (k, &c) in frame.foot_contacts.iter().enumerate() {
            if c.abs() > tol && (c - 1.0).abs() > tol {
                report.push(
                    ViolationKind::NonBinaryContact,
                    Some(f),
                    Some(skeleton.foot_joint_ids.get(k).copied().unwrap_or(k)),
                    format!("contact flag {c} is not 0 or 1"),
                );
            }
        }
        for j in skeleton.bone_children() {
            let p = skeleton.parent_index[j];
            let d = [
                frame.positions_world[j][0] - frame.positions_world[p][0],
                frame.positions_world[j][1] - frame.positions_world[p][1],
                frame.positions_world[j][2] - frame.positions_world[p][2],
            ];
            let len = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            let drift = (len - skeleton.template_bone_lengths[j]).abs();
            if drift > tol {
                report.push(
                    ViolationKind::BoneLengthDrift,
                    Some(f),
                    Some(j),
                    format!(
                        "bone length {len} drifts {drift:e} from template {}",
                        skeleton.template_bone_lengths[j]
                    ),
                );
            }
        }
    }

    // Velocity consistency: v[i] = p[i] - p[i-1] for i >= 1, v[0] = v[1].
    let joints = skeleton.joint_count;
    for f in 0..m.frames.len() {
        if m.frames[f].joint_count() != joints {
            continue;
        }
        for j in 0..joints {
            for a in 0..3 {
                let want = if f == 0 {
                    if m.frames[1].joint_count() != joints {
                        continue;
                    }
                    m.frames[1].velocities_world[j][a]
                } else {
                    m.frames[f].positions_world[j][a] - m.frames[f - 1].positions_world[j][a]
                };
                let got = m.frames[f].velocities_world[j][a];
                if (got - want).abs() > tol {
                    report.push(
                        ViolationKind::VelocityInconsistency,
                        Some(f),
                        Some(j),
                        format!("velocity {got} vs position difference {want}"),
                    );
                }
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::super::{derive_velocities_and_contacts, MotionFrame, IDENTITY_ROT6D};
    use super::*;
    use crate::motion::Skeleton;

    fn sk() -> Skeleton {
        Skeleton::new(
            vec![0, 0, 0, 1, 2],
            vec![0.0, 0.5, 0.5, 0.4, 0.4],
            [1, 2, 3, 4],
        )
        .unwrap()
    }

    fn rigid_positions(frames: usize) -> Vec<Vec<[f64; 3]>> {
        // Joints placed so every bone matches the template exactly.
        (0..frames)
            .map(|f| {
                let x = 0.02 * f as f64;
                vec![
                    [x, 1.0, 0.0],
                    [x, 0.5, 0.0],
                    [x, 1.5, 0.0],
                    [x, 0.1, 0.0],
                    [x, 1.9, 0.0],
                ]
            })
            .collect()
    }

    #[test]
    fn derived_sequence_is_clean() {
        let seq =
            derive_velocities_and_contacts(&rigid_positions(5), &sk(), 0.01, 0.05, 10.0).unwrap();
        let report = validate_motion(&seq, &sk(), 1e-6);
        assert!(report.is_clean(), "{:?}", report.violations);
    }

    #[test]
    fn zeroed_velocities_flagged() {
        let mut seq =
            derive_velocities_and_contacts(&rigid_positions(5), &sk(), 0.01, 0.05, 10.0).unwrap();
        for frame in &mut seq.frames {
            frame.velocities_world = vec![[0.0; 3]; 5];
        }
        let report = validate_motion(&seq, &sk(), 1e-6);
        assert!(report.has(ViolationKind::VelocityInconsistency));
    }

    #[test]
    fn fractional_contact_flagged() {
        let mut seq =
            derive_velocities_and_contacts(&rigid_positions(5), &sk(), 0.01, 0.05, 10.0).unwrap();
        seq.frames[2].foot_contacts[1] = 0.5;
        let report = validate_motion(&seq, &sk(), 1e-6);
        assert!(report.has(ViolationKind::NonBinaryContact));
    }

    #[test]
    fn stretched_bone_flagged() {
        let mut positions = rigid_positions(5);
        positions[3][1][1] -= 0.2;
        let seq = derive_velocities_and_contacts(&positions, &sk(), 0.01, 0.05, 10.0).unwrap();
        let report = validate_motion(&seq, &sk(), 1e-6);
        assert!(report.has(ViolationKind::BoneLengthDrift));
    }

    #[test]
    fn degenerate_rotation_flagged() {
        let frames = (0..3)
            .map(|_| MotionFrame {
                positions_world: vec![[0.0; 3]; 5],
                velocities_world: vec![[0.0; 3]; 5],
                rotations_6d: vec![IDENTITY_ROT6D; 5],
                foot_contacts: [0.0; 4],
            })
            .collect::<Vec<_>>();
        let mut seq = crate::motion::MotionSequence::new(frames, 10.0).unwrap();
        seq.frames[1].rotations_6d[2] = [0.0; 6];
        let report = validate_motion(&seq, &sk(), 1e-6);
        assert!(report.has(ViolationKind::DegenerateRotation));
        // Positions are all coincident, so bones drift too; rotation check
        // still reported independently.
    }
}
