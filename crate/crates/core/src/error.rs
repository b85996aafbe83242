use thiserror::Error;

/// Errors raised by constructors and operations in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid bounds: requires m < 0 < M with finite values (got m = {m}, M = {upper})")]
    InvalidBounds { m: f64, upper: f64 },

    #[error("invalid step function: {0}")]
    InvalidStepFunction(String),

    #[error("invalid piecewise-linear function: {0}")]
    InvalidPiecewiseLinear(String),

    #[error("invalid weight: {0}")]
    InvalidWeight(String),

    #[error("argument {value} outside weight domain [0, {cap}]")]
    OutsideDomain { value: f64, cap: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("vertex enumeration supports at most {cap} cells (got {cells})")]
    TooManyCells { cells: usize, cap: usize },

    #[error("vertex enumeration requires a convex weight")]
    NonConvexWeight,
}

pub type Result<T> = std::result::Result<T, Error>;
