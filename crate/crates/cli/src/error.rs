use std::io;
use std::path::PathBuf;

use condroc::ErrorFamily;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}, line {line}: {message}")]
    Ingest {
        path: PathBuf,
        line: u64,
        message: String,
    },
    #[error("{path}: {message}")]
    Dataset { path: PathBuf, message: String },
    #[error("invalid arguments: {0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Plan { path: PathBuf, message: String },
    #[error(transparent)]
    Core(#[from] condroc::Error),
}

pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 2;
    pub const INPUT: i32 = 3;
    pub const VALIDATION: i32 = 4;
    pub const ESTIMATION: i32 = 5;
    pub const CONFIGURATION: i32 = 6;
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Ingest { .. } | CliError::Dataset { .. } => exit::INPUT,
            CliError::Usage(_) => exit::USAGE,
            CliError::Plan { .. } => exit::CONFIGURATION,
            CliError::Core(e) => match e.family() {
                ErrorFamily::Validation => exit::VALIDATION,
                ErrorFamily::Estimation => exit::ESTIMATION,
                ErrorFamily::Configuration => exit::CONFIGURATION,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
