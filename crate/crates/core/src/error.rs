use std::fmt;

use crate::grid::Space;

/// Errors raised by the numerical routines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("expected a field in {expected} space, found {found}")]
    WrongSpace { expected: Space, found: Space },
    #[error("tensor path needs {needed} bytes, budget is {budget}")]
    MemoryBudget { needed: u64, budget: u64 },
    #[error("quadrature did not converge: value {value:e}, error estimate {error:e}")]
    Quadrature { value: f64, error: f64 },
    #[error("derivative of order {order} cannot be estimated stably (limit {limit})")]
    UnstableDerivative { order: usize, limit: usize },
    #[error("tensor and loop paths disagree by {diff:e} (tolerance {tol:e})")]
    PathMismatch { diff: f64, tol: f64 },
    #[error("degenerate data: {0}")]
    Degenerate(String),
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl fmt::Display) -> Error {
    Error::Domain(msg.to_string())
}
