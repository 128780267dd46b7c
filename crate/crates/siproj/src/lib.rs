//! Projection-aware momentum optimizers for scale-invariant parameters.
//!
//! Weights feeding a normalization layer only matter up to scale, so their
//! gradients are orthogonal to the weights and every optimizer step grows
//! the weight norm, shrinking the effective step on the unit sphere.
//! Momentum compounds that growth. The projected optimizers here (SGDP,
//! AdamP) detect scale-invariant parameters from the weight-gradient
//! cosine and remove the radial component of each update, restoring the
//! plain-GD growth rate while keeping the momentum direction.
//!
//! The crate ships:
//!
//! - [`vecmath`]: dense vector primitives, parameter blocks, projection
//!   scopes;
//! - [`objectives`]: scale-invariant test objectives with analytic
//!   gradients and a finite-difference oracle;
//! - [`optim`]: step kernels for GD, momentum, Adam, AdamW, SGDP, AdamP;
//! - [`analysis`]: closed-form norm-growth recurrences and trajectory
//!   certification;
//! - [`harness`]: config-driven experiments, CSV/JSON artifacts, and the
//!   `siproj` CLI entry points.

pub mod analysis;
pub mod error;
pub mod harness;
pub mod objectives;
pub mod optim;
pub mod rng;
pub mod vecmath;

pub use error::{Error, Result};
