//! Crate-wide error type.

/// Errors produced by construction, estimation, and optimization routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A scalar argument is outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An intensity profile violates its invariants (ordering, probability
    /// ranges, probability budget).
    #[error("invalid intensity profile: {0}")]
    InvalidProfile(String),

    /// Channel parameters violate their invariants.
    #[error("invalid channel parameters: {0}")]
    InvalidChannel(String),

    /// A tally required by the estimator is absent or empty.
    #[error("missing data for intensity pair {0}")]
    MissingPair(String),

    /// The feasible set of the yield program is empty.
    #[error("infeasible estimation: {0}")]
    Infeasible(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
