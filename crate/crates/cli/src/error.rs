use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{0}")]
    Core(#[from] multiport_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config {path}: {message}")]
    Config { path: PathBuf, message: String },

    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),

    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    /// 0 ok, 1 verification failure, 2 bad arguments, 3 I/O or parse failure.
    pub fn exit_code(&self) -> u8 {
        use multiport_core::Error as E;
        match self {
            CliError::Verification(_) => 1,
            CliError::Core(E::LawViolation { .. }) => 1,
            CliError::Core(E::MatrixFile(_)) => 3,
            CliError::Core(_) | CliError::Usage(_) => 2,
            CliError::Io { .. } | CliError::Config { .. } | CliError::Csv(_) => 3,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn usage(message: impl Into<String>) -> CliError {
    CliError::Usage(message.into())
}
