//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by the motion, diffusion, training, and evaluation layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate 6d rotation: {0}")]
    DegenerateRotation(String),
    #[error("sequence too short: need at least {need} frames, got {got}")]
    TooShort { need: usize, got: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid corpus spec: {0}")]
    InvalidSpec(String),
    #[error("invalid split fraction {0} (must be in (0, 1))")]
    InvalidFraction(f64),
    #[error("invalid schedule parameters: {0}")]
    InvalidParams(String),
    #[error("invalid timesteps: {0}")]
    InvalidTimesteps(String),
    #[error("invalid sample shape: {0}")]
    InvalidShape(String),
    #[error("non-finite activation in {0}")]
    NonFiniteActivation(String),
    #[error("non-finite gradient in {0}")]
    NonFiniteGradient(String),
    #[error("training diverged: non-finite loss at epoch {epoch}, step {step}")]
    DivergenceDetected { epoch: usize, step: usize },
    #[error("missing condition: {0}")]
    MissingCondition(String),
    #[error("size mismatch: {0}")]
    SizeMismatch(String),
    #[error("incompatible models: {0}")]
    IncompatibleModels(String),
    #[error("config error: {0}")]
    ConfigError(String),
    #[error("incompatible checkpoint: {0}")]
    IncompatibleCheckpoint(String),
    #[error("io error at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("json error at {path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub(crate) fn json(path: impl AsRef<std::path::Path>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
