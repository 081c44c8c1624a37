use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty state space: {particles} fermions cannot occupy {levels} levels")]
    EmptyStateSpace { particles: usize, levels: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("backends disagree on {quantity} by {deviation:e}")]
    BackendMismatch { quantity: &'static str, deviation: f64 },

    #[error("numerical cancellation in fermionic recursion ({particles} particles, beta = {beta})")]
    NumericalCancellation { particles: usize, beta: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

/// Rejects NaN, infinities and values `<= 0`.
pub(crate) fn ensure_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive and finite, got {value}")))
    }
}
