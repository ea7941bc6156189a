use thiserror::Error;

/// Errors surfaced by oracles, linear algebra, and the solver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error(
        "matrix is not symmetric (max asymmetry {max_asym:.3e} relative to scale {scale:.3e})"
    )]
    NotSymmetric { max_asym: f64, scale: f64 },

    #[error("matrix is not positive definite (pivot {pivot:.6e} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("direction is not a descent direction (d'g = {0:.6e})")]
    NotDescentDirection(f64),

    #[error("line search stalled after {halvings} halvings (last probe d'g = {last_probe:.6e})")]
    LineSearchStalled { halvings: u32, last_probe: f64 },

    #[error("point outside oracle domain: {0}")]
    Domain(String),

    #[error("oracle does not provide energy values")]
    EnergyUnavailable,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("mesh error: {0}")]
    Mesh(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
