use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes, one per failure class.
pub mod exit {
    pub const OK: i32 = 0;
    pub const INTERNAL: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const IO: i32 = 3;
    pub const CONFIG: i32 = 4;
    pub const DATA: i32 = 5;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error(transparent)]
    Core(#[from] cipherchain_core::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        CliError::Format {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        use cipherchain_core::Error as E;
        match self {
            CliError::Io { .. } => exit::IO,
            CliError::Config(_) => exit::CONFIG,
            CliError::Core(
                E::InvalidScaling(_)
                | E::InvalidThreshold(_)
                | E::InvalidSmoothing(_)
                | E::InvalidStateWidth(_)
                | E::InvalidPeriod(_)
                | E::ZeroRuns
                | E::AlphabetTooSmall(_)
                | E::AlphabetTooLarge(_)
                | E::DuplicateSymbol(_),
            ) => exit::CONFIG,
            CliError::Format { .. } | CliError::Core(_) | CliError::Csv(_) => exit::DATA,
            CliError::Json(_) | CliError::Pool(_) => exit::INTERNAL,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
