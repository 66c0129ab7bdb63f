use thiserror::Error;

/// Errors produced by the TAE library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum TaeError {
    /// Two inputs disagree along a named axis.
    #[error("dimension mismatch on {axis}: expected {expected}, found {found}")]
    DimensionMismatch {
        axis: &'static str,
        expected: usize,
        found: usize,
    },
    /// A cluster carries no assignment mass.
    #[error("cluster {cluster} has no assigned mass")]
    EmptyCluster { cluster: usize },
    /// A gradient or loss became NaN or infinite.
    #[error("non-finite values encountered in cluster {cluster}")]
    NumericalDivergence { cluster: usize },
    /// An argument violates a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// A symmetric routine received a non-symmetric matrix.
    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },
    /// A basis does not span the expected number of dimensions.
    #[error("basis is rank deficient: expected rank {expected}")]
    RankDeficient { expected: usize },
    /// A named column was not found in a CSV header.
    #[error("column `{0}` not found")]
    MissingColumn(String),
    /// A CSV cell could not be parsed as a number.
    #[error("non-numeric value `{value}` at row {row}, column `{column}`")]
    NonNumeric {
        row: usize,
        column: String,
        value: String,
    },
    /// A feature column has zero variance and cannot be standardized.
    #[error("column `{0}` has zero variance")]
    ZeroVariance(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, TaeError>;

impl From<std::io::Error> for TaeError {
    fn from(err: std::io::Error) -> Self {
        TaeError::Io(err.to_string())
    }
}

impl From<csv::Error> for TaeError {
    fn from(err: csv::Error) -> Self {
        TaeError::Parse(err.to_string())
    }
}

impl From<serde_json::Error> for TaeError {
    fn from(err: serde_json::Error) -> Self {
        TaeError::Parse(err.to_string())
    }
}

pub(crate) fn check_dim(axis: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(TaeError::DimensionMismatch {
            axis,
            expected,
            found,
        });
    }
    Ok(())
}
