//! Effective energy densities, Γ-limits and a discrete solver for brittle
//! damage models with a weak and a strong elastic phase.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`, which is what the CLI and the oracles use.

pub mod densities;
pub mod envelopes;
pub mod gammalab;
pub mod error;
mod linalg;
pub mod microstructure;
pub mod oracles;
pub mod scalar;
pub mod symcalc;

pub use error::{Error, Result};
pub use scalar::Real;

pub type SymMat64 = symcalc::SymMat<f64>;
pub type SymMat32 = symcalc::SymMat<f32>;
pub type IsoTensor64 = symcalc::IsoTensor<f64>;
pub type ModelParams64 = densities::ModelParams<f64>;
