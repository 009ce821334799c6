//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the estimation, selection and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input that must be finite was NaN or infinite.
    #[error("input must be finite")]
    NonFiniteInput,
    /// A direction is undefined because the resultant vector is zero.
    #[error("undefined direction: zero resultant vector")]
    UndefinedDirection,
    /// An input collection that must be nonempty was empty.
    #[error("input must be nonempty")]
    EmptyInput,
    /// A vector or matrix had the wrong dimension.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    /// Two paired collections had different lengths.
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    /// A matrix that must be symmetric positive definite is not.
    #[error("matrix is not symmetric positive definite")]
    NotPositiveDefinite,
    /// A covariance matrix could not be factorized even after diagonal jitter.
    #[error("covariance matrix is not positive semidefinite (jitter exhausted)")]
    NotPsd,
    /// No observation carries positive kernel weight at the evaluation point.
    #[error("no observation with positive kernel weight at the evaluation point")]
    EmptyNeighborhood,
    /// A curvature matrix has mixed-sign or near-zero eigenvalues, so no
    /// optimal bandwidth is defined.
    #[error("curvature matrix has mixed-sign or near-zero eigenvalues")]
    IndefiniteCurvature,
    /// A scalar or structural parameter failed validation.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// A point lies outside the domain of the requested trend function.
    #[error("point outside the trend function domain: {0}")]
    DomainViolation(String),
    /// The selection criterion is not finite at the initial bandwidth.
    #[error("criterion is not finite at the initial bandwidth")]
    NonFiniteCriterion,
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
