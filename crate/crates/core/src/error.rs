use thiserror::Error;

/// Errors produced by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// The requested counterexample lies inside the regime where the inequality holds.
    #[error("no violation: {0}")]
    NoViolation(String),

    /// A quotient or power is undefined at the given input (e.g. division by a zero value).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("quadrature did not reach tolerance: estimate {estimate:e}, error {error:e}")]
    Quadrature { estimate: f64, error: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
