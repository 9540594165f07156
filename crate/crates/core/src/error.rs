use thiserror::Error;

/// Errors raised by the soaring core.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum Error {
    /// A model parameter is outside its valid domain.
    #[error("invalid parameter `{name}`: {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    /// A measurement was NaN or infinite.
    #[error("non-finite observation: {0}")]
    NonFiniteObservation(f64),
    /// Covariance could not be factored even after adding jitter.
    #[error("belief covariance is not positive definite")]
    NotPositiveDefinite,
    /// A configuration invariant is violated.
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, value })
    }
}
