//! Group-structured random measurement operators over generalized sparsity
//! models, with empirical restricted-isometry estimation, sample-complexity
//! bound evaluation and ε-net machinery for rank-1 tensor hulls.
//!
//! A vector `x ∈ C^N` is `(K, s)`-sparse when `‖x‖_X ≤ √s ‖x‖_2`, where `X`
//! is the Banach space whose unit ball is the convex body `K`. The
//! [`sparsity`] module provides four concrete bodies; [`groups`] provides
//! finite groups acting isotropically on `C^N`; [`measurement`] builds
//! operators `A = m^{-1/2} (u σ(g_j))_j` from them; [`rip`] estimates
//! `sup_{x ∈ K_s} |‖Ax‖² − ⟨x, Φx⟩|`.

pub mod bounds;
pub mod error;
pub mod groups;
pub mod harness;
pub mod linalg;
pub mod measurement;
pub mod nets;
pub mod rip;
pub mod rng;
pub mod signal;
pub mod sparsity;

pub use error::{Error, Result};
pub use groups::{GroupDescriptor, GroupElement};
pub use measurement::{Instrument, MeasurementOperator, SensingOperator};
pub use rip::RipEstimate;
pub use signal::{Shape, SignalVector};
pub use sparsity::{NormValue, SparseSample, SparsityModel, Sparsity};

/// Library version embedded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
