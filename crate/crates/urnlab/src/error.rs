//! Shared error type for all urn-model operations.

/// Errors produced by model construction, validation and the engines.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    /// Dimension constraints violated (`r >= 2`, `m >= 1`, matching lengths).
    #[error("invalid dimensions: {0}")]
    InvalidDimension(String),

    /// An argument breaks a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Replacement rows do not share a common row sum.
    #[error("unbalanced model: {0}")]
    Unbalanced(String),

    /// The common row sum exists but is not positive.
    #[error("nonpositive balance: common row sum is {0}, expected > 0")]
    NonpositiveBalance(i64),

    /// The model can demand removing balls that are not present.
    #[error("non-tenable model: {0}")]
    NotTenable(String),

    /// Expanding a reduced matrix produced a fractional ball count.
    #[error("non-integral model: {0}")]
    NonIntegral(String),

    /// A moment operation was asked of a model that is not linear.
    #[error("model is not linear: {0}")]
    NotLinear(String),

    /// A sample of size `m` cannot be drawn from the composition.
    #[error("insufficient balls: {0}")]
    InsufficientBalls(String),

    /// Exact evolution exceeded the configured support cap.
    #[error("state cap exceeded: {0}")]
    CapExceeded(String),

    /// No covariance-constant candidate reproduced the enumerated moments.
    #[error("conformance failure: {0}")]
    Conformance(String),

    /// Model file could not be read or does not describe a valid model.
    #[error("model file error: {0}")]
    Parse(String),

    /// A ball count left the 64-bit range.
    #[error("arithmetic overflow: {0}")]
    Overflow(String),

    /// A path reached a negative count; signals a checker bug upstream.
    #[error("tenability violation during simulation: {0}")]
    TenabilityFault(String),

    /// An internal consistency check failed.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
