use thiserror::Error;

/// Errors produced while building or evaluating quasi-interpolants.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum QiError {
    #[error("degree must be at least 1, got {0}")]
    InvalidDegree(usize),

    #[error("finite-difference order must be at least 1, got {0}")]
    InvalidOrder(usize),

    #[error("breakpoints must be strictly increasing (violated at index {index})")]
    NonMonotone { index: usize },

    #[error("non-finite value in {what} at index {index}")]
    NonFinite { what: &'static str, index: usize },

    #[error("too few breakpoints: {what} needs at least {needed} mesh intervals, got {got}")]
    TooFewIntervals {
        what: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("{0}")]
    InvalidPeriod(String),

    #[error("point {x} lies outside the spline domain [{a}, {b}]")]
    OutOfDomain { x: f64, a: f64, b: f64 },

    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("{0}")]
    MissingData(&'static str),

    #[error("singular local system ({0})")]
    Singular(&'static str),

    #[error("{0}")]
    InvalidInput(String),

    #[error("spline format: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, QiError>;
