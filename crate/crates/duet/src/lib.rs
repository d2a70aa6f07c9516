//! Two-person motion generation with diffusion models.
//!
//! The crate implements a complete desk-scale pipeline:
//!
//! - [`motion`]: skeletons, per-frame motion representation, 6D rotations,
//!   validation, and the flat tensor form used by the diffusion stack.
//! - [`corpus`]: a procedurally generated, labeled two-person interaction
//!   corpus with separable interaction-level and individual-level labels.
//! - [`diffusion`]: cosine noise schedule, forward noising, and
//!   deterministic reverse sampling with clean-sample parameterization.
//! - [`denoiser`]: the Siamese interaction denoiser and the single-person
//!   motion prior, with training and exact gradients.
//! - [`guidance`]: per-condition multi-weight classifier-free guidance.
//! - [`composition`]: blending the interaction model with the motion prior
//!   under parameterized weight schedulers.
//! - [`losses`]: the training objective (reconstruction plus kinematic
//!   terms with a timestep-dependent weight).
//! - [`metrics`]: deterministic motion embedder, EID, FID, Diversity,
//!   MultiModality, and R-Precision/MM-Dist proxies.
//! - [`cli`]: the `duet` command surface (corpus synthesis, training,
//!   sampling, composition, evaluation, export, sweeps).
//!
//! Start with the runnable examples in `examples/` — one per capability.

pub mod autodiff;
pub mod cli;
pub mod composition;
pub mod config;
pub mod corpus;
pub mod denoiser;
pub mod diffusion;
pub mod error;
pub mod guidance;
pub mod losses;
pub mod metrics;
pub mod motion;

pub use error::{Error, Result};
