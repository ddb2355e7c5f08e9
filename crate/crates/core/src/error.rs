//! Error type shared by all modules.

use thiserror::Error;

/// Errors surfaced by the numerical kernels and the detection pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A matrix that must have full column rank does not (e.g. `[J H]`).
    #[error("matrix is rank deficient: {0}")]
    RankDeficient(String),

    /// A Hermitian matrix required to be positive definite is not.
    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    /// A block that must be inverted is singular to working precision.
    #[error("singular block: {0}")]
    SingularBlock(String),

    /// Operand shapes do not agree.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Steering frequencies must be distinct.
    #[error("duplicate steering frequency: {0}")]
    DuplicateFrequency(String),

    /// A direction vector that must be nonzero is zero.
    #[error("zero direction vector")]
    ZeroDirection,

    /// Scalar argument outside the admissible domain.
    #[error("domain error: {0}")]
    DomainError(String),

    /// Group-element reconstruction requested for statistics with
    /// different maximal invariants.
    #[error("maximal invariants differ beyond tolerance: {0}")]
    InvariantMismatch(String),

    /// Adaptive quadrature failed to converge within the node budget.
    #[error("quadrature did not converge: {0}")]
    QuadratureNotConverged(String),

    /// Threshold inversion target outside the achievable range.
    #[error("target probability not bracketable: {0}")]
    NotBracketable(String),

    /// Monte Carlo threshold calibration called with too few trials.
    #[error("insufficient trials: {0}")]
    InsufficientTrials(String),

    /// A dual-route statistic failed its internal agreement check.
    #[error("self-check failed: {0}")]
    SelfCheckFailed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
