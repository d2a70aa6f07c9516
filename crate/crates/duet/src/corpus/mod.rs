//! Procedurally generated two-person interaction corpus.
//!
//! Interaction labels control the relative root trajectory of the pair;
//! individual labels control one person's limb pattern via sinusoidal joint
//! rotations on a template skeleton. Everything is closed-form in the frame
//! index, so corpus statistics can be checked analytically, and every limb
//! motion is a rigid rotation, so bone lengths match the template exactly.

mod generate;
mod io;
mod split;

pub use generate::{generate_corpus, generate_sample, template_skeleton};
pub use io::{load_corpus, write_corpus, CorpusIndex, IndexEntry};
pub use split::split_corpus;

use crate::error::{Error, Result};
use crate::motion::MotionSequence;
use serde::{Deserialize, Serialize};

/// Which conditioning slot a label may occupy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelKind {
    Interaction,
    Individual,
    Null,
}

/// A categorical condition. Id 0 with kind `Null` is reserved for the
/// unconditional token; all other ids index the condition embedding table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionLabel {
    pub id: u32,
    pub kind: LabelKind,
    pub name: String,
}

impl ConditionLabel {
    /// The reserved unconditional token.
    pub fn null() -> Self {
        ConditionLabel {
            id: 0,
            kind: LabelKind::Null,
            name: "unconditional".into(),
        }
    }
}

/// Relative-trajectory family for the pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InteractionPattern {
    Approach,
    Circle,
    Mirror,
    PushRetreat,
}

/// Limb-motion family for one person.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimbPattern {
    WaveRight,
    WaveLeft,
    Bow,
    KickRight,
    StepInPlace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionLabelSpec {
    pub name: String,
    pub pattern: InteractionPattern,
    /// Oscillation frequency in Hz where the pattern oscillates.
    pub frequency_hz: f64,
    /// Oscillation amplitude in meters where the pattern oscillates.
    pub amplitude_m: f64,
    /// Meters per second; used by the approach pattern.
    pub approach_speed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndividualLabelSpec {
    pub name: String,
    pub pattern: LimbPattern,
    pub frequency_hz: f64,
    pub amplitude_rad: f64,
}

/// Generator parameters for one corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSpec {
    pub sample_count: usize,
    pub frames_per_sample: usize,
    pub frame_rate: f64,
    pub seed: u64,
    pub interaction_vocab: Vec<InteractionLabelSpec>,
    pub individual_vocab: Vec<IndividualLabelSpec>,
}

impl CorpusSpec {
    /// Desk-scale default: 200 samples of 16 frames at 10 fps over the full
    /// pattern vocabulary.
    pub fn desk_default() -> Self {
        CorpusSpec {
            sample_count: 200,
            frames_per_sample: 16,
            frame_rate: 10.0,
            seed: 7,
            interaction_vocab: vec![
                InteractionLabelSpec {
                    name: "approach".into(),
                    pattern: InteractionPattern::Approach,
                    frequency_hz: 0.0,
                    amplitude_m: 0.0,
                    approach_speed: 0.3,
                },
                InteractionLabelSpec {
                    name: "circle".into(),
                    pattern: InteractionPattern::Circle,
                    frequency_hz: 0.2,
                    amplitude_m: 0.9,
                    approach_speed: 0.0,
                },
                InteractionLabelSpec {
                    name: "mirror".into(),
                    pattern: InteractionPattern::Mirror,
                    frequency_hz: 0.4,
                    amplitude_m: 0.02,
                    approach_speed: 0.0,
                },
                InteractionLabelSpec {
                    name: "push-retreat".into(),
                    pattern: InteractionPattern::PushRetreat,
                    frequency_hz: 0.3,
                    amplitude_m: 0.15,
                    approach_speed: 0.0,
                },
            ],
            individual_vocab: vec![
                IndividualLabelSpec {
                    name: "wave-right".into(),
                    pattern: LimbPattern::WaveRight,
                    frequency_hz: 1.0,
                    amplitude_rad: 0.3,
                },
                IndividualLabelSpec {
                    name: "wave-left".into(),
                    pattern: LimbPattern::WaveLeft,
                    frequency_hz: 1.0,
                    amplitude_rad: 0.3,
                },
                IndividualLabelSpec {
                    name: "bow".into(),
                    pattern: LimbPattern::Bow,
                    frequency_hz: 0.5,
                    amplitude_rad: 1.0,
                },
                IndividualLabelSpec {
                    name: "kick-right".into(),
                    pattern: LimbPattern::KickRight,
                    frequency_hz: 0.8,
                    amplitude_rad: 0.9,
                },
                IndividualLabelSpec {
                    name: "step-in-place".into(),
                    pattern: LimbPattern::StepInPlace,
                    frequency_hz: 0.5,
                    amplitude_rad: 0.5,
                },
            ],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sample_count == 0 {
            return Err(Error::InvalidSpec("sample_count must be positive".into()));
        }
        if self.frames_per_sample < 2 {
            return Err(Error::InvalidSpec(
                "frames_per_sample must be at least 2".into(),
            ));
        }
        if !(self.frame_rate > 0.0) {
            return Err(Error::InvalidSpec("frame_rate must be positive".into()));
        }
        if self.interaction_vocab.is_empty() || self.individual_vocab.is_empty() {
            return Err(Error::InvalidSpec("vocabularies must be non-empty".into()));
        }
        let mut names = std::collections::BTreeSet::new();
        for l in &self.interaction_vocab {
            if !names.insert(l.name.clone()) {
                return Err(Error::InvalidSpec(format!(
                    "duplicate interaction label name {:?}",
                    l.name
                )));
            }
        }
        names.clear();
        for l in &self.individual_vocab {
            if !names.insert(l.name.clone()) {
                return Err(Error::InvalidSpec(format!(
                    "duplicate individual label name {:?}",
                    l.name
                )));
            }
        }
        Ok(())
    }

    /// Global label id for interaction vocab entry `idx` (ids start at 1;
    /// id 0 is the unconditional token).
    pub fn interaction_label(&self, idx: usize) -> ConditionLabel {
        ConditionLabel {
            id: 1 + idx as u32,
            kind: LabelKind::Interaction,
            name: self.interaction_vocab[idx].name.clone(),
        }
    }

    /// Global label id for individual vocab entry `idx`.
    pub fn individual_label(&self, idx: usize) -> ConditionLabel {
        ConditionLabel {
            id: 1 + self.interaction_vocab.len() as u32 + idx as u32,
            kind: LabelKind::Individual,
            name: self.individual_vocab[idx].name.clone(),
        }
    }

    /// Full label vocabulary including the unconditional token at id 0.
    pub fn vocabulary(&self) -> Vec<ConditionLabel> {
        let mut v = vec![ConditionLabel::null()];
        for i in 0..self.interaction_vocab.len() {
            v.push(self.interaction_label(i));
        }
        for i in 0..self.individual_vocab.len() {
            v.push(self.individual_label(i));
        }
        v
    }

    pub fn label_row_count(&self) -> usize {
        1 + self.interaction_vocab.len() + self.individual_vocab.len()
    }

    pub fn interaction_index_by_name(&self, name: &str) -> Option<usize> {
        self.interaction_vocab.iter().position(|l| l.name == name)
    }

    pub fn individual_index_by_name(&self, name: &str) -> Option<usize> {
        self.individual_vocab.iter().position(|l| l.name == name)
    }
}

/// One labeled two-person sample.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionSample {
    pub person_a: MotionSequence,
    pub person_b: MotionSequence,
    pub interaction_label: ConditionLabel,
    pub individual_label_a: ConditionLabel,
    pub individual_label_b: ConditionLabel,
}

impl InteractionSample {
    pub fn new(
        person_a: MotionSequence,
        person_b: MotionSequence,
        interaction_label: ConditionLabel,
        individual_label_a: ConditionLabel,
        individual_label_b: ConditionLabel,
    ) -> Result<Self> {
        if person_a.frame_count() != person_b.frame_count()
            || person_a.frame_rate != person_b.frame_rate
        {
            return Err(Error::ShapeMismatch(
                "paired sequences must share frame count and rate".into(),
            ));
        }
        if interaction_label.kind != LabelKind::Interaction {
            return Err(Error::InvalidSpec(format!(
                "label {:?} is not an interaction label",
                interaction_label.name
            )));
        }
        for l in [&individual_label_a, &individual_label_b] {
            if l.kind != LabelKind::Individual {
                return Err(Error::InvalidSpec(format!(
                    "label {:?} is not an individual label",
                    l.name
                )));
            }
        }
        Ok(InteractionSample {
            person_a,
            person_b,
            interaction_label,
            individual_label_a,
            individual_label_b,
        })
    }

    pub fn frame_count(&self) -> usize {
        self.person_a.frame_count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_spec_is_valid() {
        let spec = CorpusSpec::desk_default();
        spec.validate().unwrap();
        assert_eq!(spec.sample_count, 200);
        assert_eq!(spec.frames_per_sample, 16);
        assert_eq!(spec.label_row_count(), 10);
    }

    #[test]
    fn label_ids_are_globally_unique() {
        let spec = CorpusSpec::desk_default();
        let vocab = spec.vocabulary();
        let mut ids: Vec<u32> = vocab.iter().map(|l| l.id).collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), vocab.len());
        assert_eq!(vocab[0].id, 0);
        assert_eq!(vocab[0].kind, LabelKind::Null);
    }

    #[test]
    fn spec_rejects_empty_vocab() {
        let mut spec = CorpusSpec::desk_default();
        spec.individual_vocab.clear();
        assert!(spec.validate().is_err());
    }

    #[test]
    fn sample_rejects_wrong_label_kinds() {
        let spec = CorpusSpec::desk_default();
        let sample = generate_sample(&spec, 0, 0, 0, 1).unwrap();
        let err = InteractionSample::new(
            sample.person_a.clone(),
            sample.person_b.clone(),
            spec.individual_label(0),
            spec.individual_label(0),
            spec.individual_label(1),
        );
        assert!(err.is_err());
    }
}
