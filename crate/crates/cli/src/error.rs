use std::path::PathBuf;

use thiserror::Error;

/// Failures of a CLI command, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("{path}: line {line}, column {column}: {message}")]
    ParseAt {
        path: String,
        line: u64,
        column: usize,
        message: String,
    },

    #[error("{path}: {message}")]
    Parse { path: String, message: String },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("partial recovery: {found} of {requested} columns ({reason})")]
    Partial {
        found: usize,
        requested: usize,
        reason: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::ParseAt { .. } | CliError::Parse { .. } => 3,
            CliError::Numerical(_) => 4,
            CliError::Partial { .. } => 5,
            CliError::Io { .. } => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<pegi_core::Error> for CliError {
    fn from(e: pegi_core::Error) -> Self {
        use pegi_core::Error as E;
        match e {
            E::PartialRecovery {
                found,
                requested,
                reason,
            } => CliError::Partial {
                found,
                requested,
                reason,
            },
            E::InsufficientData(_)
            | E::DimensionMismatch { .. }
            | E::InvalidInput(_)
            | E::Precondition(_)
            | E::ModelConstruction(_) => CliError::Usage(e.to_string()),
            E::NumericalConsistency(_)
            | E::DegenerateDirection { .. }
            | E::NonConvergence { .. }
            | E::IllConditionedRow { .. }
            | E::RankDeficient { .. }
            | E::Evaluation(_) => CliError::Numerical(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
