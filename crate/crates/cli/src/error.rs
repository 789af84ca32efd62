use std::fmt;

/// Failure classes, each with its own process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config values or config files. Exit 1.
    Usage(String),
    /// Unreadable, malformed or mismatched data and model files. Exit 2.
    Data(String),
    /// A broken internal invariant. Exit 3.
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl From<ssi_core::Error> for CliError {
    fn from(e: ssi_core::Error) -> Self {
        use ssi_core::Error as E;
        let msg = e.to_string();
        match e {
            E::Config(_) => CliError::Usage(msg),
            E::Cluster(_) | E::Diverged(_) => CliError::Internal(msg),
            E::Io { .. }
            | E::Parse { .. }
            | E::EmptyDataset
            | E::DimensionMismatch { .. }
            | E::LengthMismatch { .. }
            | E::MixedLabelSubject(_)
            | E::MissingClass(_)
            | E::InvalidInput(_)
            | E::Model(_) => CliError::Data(msg),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
