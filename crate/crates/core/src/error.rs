use thiserror::Error;

/// Errors raised by the operator algebra, the bath routines and the integrators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("not a valid density matrix: {0}")]
    InvalidState(String),

    #[error("factor index {index} out of range for a space with {factors} factors")]
    InvalidFactor { index: usize, factors: usize },

    #[error("quadrature did not reach tolerance {requested:e}: achieved {achieved:e} ({context})")]
    QuadratureFailed {
        requested: f64,
        achieved: f64,
        context: String,
    },

    #[error("extrapolation residual {residual:e} above tolerance {tolerance:e} for {coefficient}")]
    ExtrapolationFailed {
        coefficient: &'static str,
        residual: f64,
        tolerance: f64,
    },

    #[error("integration quality gate tripped at t = {time}: {reason}")]
    IntegrationFailed { time: f64, reason: String },

    #[error("generator is not linear: additivity defect {defect:e}")]
    Nonlinear { defect: f64 },

    #[error("desk-scale bound exceeded: dimension {dim} > {limit}")]
    TooLarge { dim: usize, limit: usize },

    #[error("{0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
