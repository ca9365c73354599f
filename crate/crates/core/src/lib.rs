//! Bernoulli kernelized bandits: kernels, RKHS test functions, GP and
//! kernel-weighted Beta estimators, confidence bounds, policies and an
//! experiment harness.

pub mod bernoulli;
pub mod bounds;
pub mod env;
pub mod error;
pub mod gp;
pub mod harness;
pub mod kernel;
pub mod policy;

pub use error::{Error, Result};
pub use kernel::{KernelSpec, MaternNu, Point};
