//! Motion file formats: JSON for sequences, CSV export in tensor order.

use super::{feature_width, MotionFrame, MotionSequence, Skeleton};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

#[derive(Serialize, Deserialize)]
struct MotionFile {
    frame_rate: f64,
    skeleton: Skeleton,
    frames: Vec<FrameRecord>,
}

#[derive(Serialize, Deserialize)]
struct FrameRecord {
    pos: Vec<[f64; 3]>,
    vel: Vec<[f64; 3]>,
    rot6d: Vec<[f64; 6]>,
    contacts: [u8; 4],
}

/// Write one person's motion as JSON. Contact flags must be exactly 0 or 1.
pub fn write_motion_json(
    path: impl AsRef<Path>,
    seq: &MotionSequence,
    skeleton: &Skeleton,
) -> Result<()> {
    let frames = seq
        .frames
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let mut contacts = [0u8; 4];
            for (k, &c) in f.foot_contacts.iter().enumerate() {
                contacts[k] = if c == 0.0 {
                    0
                } else if c == 1.0 {
                    1
                } else {
                    return Err(Error::ShapeMismatch(format!(
                        "frame {i} contact {k} is {c}, not binary; sanitize before writing"
                    )));
                };
            }
            Ok(FrameRecord {
                pos: f.positions_world.clone(),
                vel: f.velocities_world.clone(),
                rot6d: f.rotations_6d.clone(),
                contacts,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let file = MotionFile {
        frame_rate: seq.frame_rate,
        skeleton: skeleton.clone(),
        frames,
    };
    let text = serde_json::to_string(&file).map_err(|e| Error::json(&path, e))?;
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

/// Read a motion JSON file, returning the sequence and its skeleton.
pub fn read_motion_json(path: impl AsRef<Path>) -> Result<(MotionSequence, Skeleton)> {
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let file: MotionFile = serde_json::from_str(&text).map_err(|e| Error::json(&path, e))?;
    let frames = file
        .frames
        .into_iter()
        .map(|f| MotionFrame {
            positions_world: f.pos,
            velocities_world: f.vel,
            rotations_6d: f.rot6d,
            foot_contacts: [
                f.contacts[0] as f64,
                f.contacts[1] as f64,
                f.contacts[2] as f64,
                f.contacts[3] as f64,
            ],
        })
        .collect();
    let seq = MotionSequence::new(frames, file.frame_rate)?;
    if seq.joint_count() != file.skeleton.joint_count {
        return Err(Error::ShapeMismatch(format!(
            "motion has {} joints, embedded skeleton has {}",
            seq.joint_count(),
            file.skeleton.joint_count
        )));
    }
    Ok((seq, file.skeleton))
}

/// Column names in the fixed tensor order.
pub fn motion_csv_header(joint_count: usize) -> Vec<String> {
    let axes = ["x", "y", "z"];
    let mut cols = Vec::with_capacity(feature_width(joint_count));
    for j in 0..joint_count {
        for a in axes {
            cols.push(format!("pos_{j}_{a}"));
        }
    }
    for j in 0..joint_count {
        for a in axes {
            cols.push(format!("vel_{j}_{a}"));
        }
    }
    for j in 0..joint_count {
        for k in 0..6 {
            cols.push(format!("rot_{j}_{k}"));
        }
    }
    for k in 0..4 {
        cols.push(format!("contact_{k}"));
    }
    cols
}

/// Export a sequence as CSV: one row per frame, columns in tensor order,
/// header row naming each column.
pub fn write_motion_csv(path: impl AsRef<Path>, seq: &MotionSequence) -> Result<()> {
    let tensor = seq.to_tensor();
    let joints = tensor.joint_count()?;
    let mut out = Vec::new();
    writeln!(out, "{}", motion_csv_header(joints).join(","))
        .map_err(|e| Error::io(&path, e))?;
    for f in 0..tensor.frame_count {
        let row: Vec<String> = tensor.row(f).iter().map(|v| format!("{v}")).collect();
        writeln!(out, "{}", row.join(",")).map_err(|e| Error::io(&path, e))?;
    }
    std::fs::write(&path, out).map_err(|e| Error::io(&path, e))
}
