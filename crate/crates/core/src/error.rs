use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A problem with one row of an input file. `row` is the 1-based line
    /// number in the file, header included.
    #[error("{path}: row {row}: {message}")]
    Row { path: String, row: usize, message: String },

    #[error("invalid data: {0}")]
    Data(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("empty vocabulary: no term reaches the document-frequency cutoff")]
    EmptyVocabulary,

    #[error("SVD failed to converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("duplicate point {0}: all distances to other points are zero")]
    DuplicatePoint(usize),

    #[error("unsupported model file version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },

    #[error("corrupted model file: {0}")]
    Corrupted(String),

    #[error("training-data fingerprint mismatch: model has {found}, expected {expected}")]
    Fingerprint { found: String, expected: String },

    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn row(path: &str, row: usize, message: impl Into<String>) -> Self {
        Error::Row {
            path: path.to_string(),
            row,
            message: message.into(),
        }
    }

    /// True for failures of a numerical routine rather than bad input.
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::NoConvergence { .. } | Error::Numeric(_) => true,
            Error::Fold { source, .. } => source.is_numeric(),
            _ => false,
        }
    }
}
