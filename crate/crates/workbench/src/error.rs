use std::path::PathBuf;

use cavity_qfc::QfcError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error(transparent)]
    Model(#[from] QfcError),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn parse(line: u64, message: impl Into<String>) -> Self {
        CliError::Parse {
            line,
            message: message.into(),
        }
    }

    /// Process exit status: 2 usage, 3 parse, 4 domain, 5 numeric, 6 io.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Parse { .. } => 3,
            CliError::Model(e) => match e {
                QfcError::NumericFailure { .. } | QfcError::SingularFit(_) | QfcError::NoPeriodicity(_) => 5,
                _ => 4,
            },
            CliError::Io { .. } => 6,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
