use thiserror::Error;

/// Failures reported by the simulation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("non-finite value encountered at t = {0}")]
    NonFinite(f64),
    #[error("trace drift {drift:.3e} exceeds limit at t = {t}")]
    TraceDrift { drift: f64, t: f64 },
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("resource limit: {0}")]
    ResourceLimit(String),
    #[error("undefined: {0}")]
    Undefined(String),
}

pub type Result<T> = std::result::Result<T, Error>;
