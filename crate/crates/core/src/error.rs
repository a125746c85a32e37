use thiserror::Error;

/// Errors raised by the numerical library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unsupported dimension {0} (expected 2 or 3)")]
    BadDimension(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("isotropic tensor is not invertible (n*lambda + 2*mu = {bulk}, mu = {mu})")]
    NotInvertible { bulk: f64, mu: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("matrix is not deviatoric (trace = {0:e})")]
    NotDeviatoric(f64),

    #[error("no feasible KKT candidate in spectral maximization")]
    NoFeasibleCandidate,

    #[error("primal/dual gap {gap:e} exceeds tolerance {tol:e}")]
    DualityGap { gap: f64, tol: f64 },

    #[error("conjugate gradients did not converge after {iterations} iterations (relative residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("invalid laminate: {0}")]
    InvalidLaminate(String),

    #[error("jump normal is not a unit vector (|nu| = {0})")]
    NonUnitNormal(f64),

    #[error("jump is not tangential ([u].nu = {0:e}); such jumps have infinite Tresca energy")]
    NormalJump(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
