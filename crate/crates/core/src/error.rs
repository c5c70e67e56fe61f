use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("index {index} is outside 1..={dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("index {0} appears more than once")]
    DuplicateIndex(usize),

    #[error("ambient dimensions differ ({left} vs {right})")]
    AmbientMismatch { left: usize, right: usize },

    #[error("cardinality mismatch: {0}")]
    Cardinality(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e}, tolerance {tolerance:e})")]
    NotPositiveDefinite { min_eigenvalue: f64, tolerance: f64 },

    #[error("matrix is numerically singular: {0}")]
    Singular(String),

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Errors raised by the numerics rather than by malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotSymmetric(_) | Error::NotPositiveDefinite { .. } | Error::Singular(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
