//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by operator construction, evaluation, solving and
/// instance handling.
#[derive(Debug, Error)]
pub enum Error {
    /// A vector or matrix did not have the dimension an operation required.
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// The zero map has no positive operator norm and cannot drive any
    /// Landweber-type construction.
    #[error("zero operator")]
    ZeroOperator,

    /// A parameter was outside its admissible range.
    #[error("invalid parameter {name}: {message}")]
    InvalidParameter { name: &'static str, message: String },

    /// A point supplied as a fixed point failed the residual check.
    #[error("invalid fixed point: residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    InvalidFixedPoint { residual: f64, tol: f64 },

    /// A subgradient step was requested where the selected subgradient
    /// vanishes while the function value is positive.
    #[error("infeasible subgradient step")]
    InfeasibleSubgradientStep,

    /// A non-finite value (NaN or infinity) entered an operation.
    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },

    /// An operator orbit produced a non-finite iterate.
    #[error("non-finite orbit value at step {index}")]
    NonFiniteOrbit { index: usize },

    /// A problem instance failed validation.
    #[error("invalid instance field `{field}`: {message}")]
    InvalidInstance { field: String, message: String },

    /// An instance file could not be parsed.
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),

    /// Filesystem failure while reading or writing instance/trace files.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parameter(name: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            message: message.into(),
        }
    }

    pub(crate) fn instance(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidInstance {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
