use thiserror::Error;

/// Failures reported by the decomposition and whitening routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The matrix has an eigenvalue (or Cholesky pivot) at or below the
    /// positive-definiteness threshold.
    #[error("matrix is not positive definite: {what} = {value:e} (threshold {threshold:e})")]
    NotPositiveDefinite {
        what: String,
        value: f64,
        threshold: f64,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
