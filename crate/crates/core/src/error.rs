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

    /// Malformed input file. `row` is 1-based over data rows (the header is row 0).
    #[error("{path}: row {row}, column `{column}`: {message}")]
    Parse {
        path: String,
        row: usize,
        column: String,
        message: String,
    },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("length mismatch: expected {expected}, got {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("subject `{0}` has instances with both labels")]
    MixedLabelSubject(String),

    #[error("dataset needs at least one {0} instance")]
    MissingClass(&'static str),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("k-means: {0}")]
    Cluster(String),

    #[error("training diverged: {0}")]
    Diverged(String),

    #[error("{0}")]
    InvalidInput(String),

    #[error("model file: {0}")]
    Model(String),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
