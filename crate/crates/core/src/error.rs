use thiserror::Error;

use crate::dynamics::Trajectory;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid weight {weight} on simplex {simplex:?}")]
    InvalidWeight { simplex: Vec<usize>, weight: f64 },

    #[error("invalid simplex {simplex:?}: {reason}")]
    InvalidSimplex { simplex: Vec<usize>, reason: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("operator undefined: {0}")]
    UndefinedOperator(String),

    #[error("dimension mismatch: expected length {expected}, got {actual}")]
    DimensionError { expected: usize, actual: usize },

    /// Integration hit a non-finite state; the samples recorded so far are kept.
    #[error("trajectory diverged at t = {time}")]
    Divergence { time: f64, partial: Box<Trajectory> },

    #[error("nonlinearity '{0}' is unbounded")]
    UnboundedNonlinearity(String),

    #[error("numerical failure: {0}")]
    NumericalError(String),

    #[error("no convergence after {iterations} Newton iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("no twist solution: linear residual {residual:e}")]
    NoSolution { residual: f64 },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Parse(err.to_string())
    }
}
