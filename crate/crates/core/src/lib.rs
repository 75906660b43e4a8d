//! Sparse additive kernel contextual bandits.

pub mod additive;
pub mod baselines;
pub mod error;
pub mod estimator;
pub mod env;
pub mod harness;
pub mod kernel;
pub mod policy;
pub mod quadrature;
pub mod sparkle_policy;
pub mod special;

pub use additive::{AdditiveFunction, Component, SampleBatch};
pub use error::{Error, Result};
pub use kernel::KernelSpec;
