use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("indeterminate extended-real operation: {0}")]
    Indeterminate(&'static str),

    #[error("value is NaN where a real or extended real was required")]
    NotANumber,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid interval: lower bound must be strictly below upper bound (dimension {dim})")]
    EmptyInterval { dim: usize },

    #[error("containment violated: {0}")]
    Containment(String),

    #[error("oscillation bound is unbounded; use the unbounded-regression bound")]
    UnboundedOscillation,

    #[error("unbounded bound requires upsilon == delta == gamma")]
    BoxesNotEqual,

    #[error("empty neighborhood: every kernel weight vanishes at the query point")]
    EmptyNeighborhood,

    #[error("quadrature did not converge after {subdivisions} subdivisions (error estimate {error_estimate:e})")]
    QuadratureNonConvergence { subdivisions: usize, error_estimate: f64 },

    #[error("integrand returned a non-finite value at {at}")]
    NonFiniteIntegrand { at: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
