use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage error: `{key}`: {reason}")]
    Usage { key: String, reason: String },

    #[error("range error: `{key}`: {reason}")]
    Range { key: String, reason: String },

    #[error("io error: {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Simulation(#[from] bellsim::Error),

    #[error("statistical comparison failed: {0}")]
    Statistical(String),
}

impl CliError {
    pub(crate) fn usage(key: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Usage {
            key: key.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn range(key: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Range {
            key: key.into(),
            reason: reason.into(),
        }
    }

    /// 0 success, 2 usage, 3 range, 4 io, 5 statistical failure.
    pub fn exit_code(&self) -> u8 {
        use bellsim::Error as E;
        match self {
            CliError::Usage { .. } => 2,
            CliError::Range { .. } => 3,
            CliError::Io { .. } => 4,
            CliError::Statistical(_) => 5,
            CliError::Simulation(e) => match e {
                E::InvalidParameter { .. } | E::StarvedSource { .. } | E::DegenerateInput(_) => 3,
                E::WorkerPool(_) => 4,
                E::FitFailure(_) | E::ConvergenceFailure { .. } => 5,
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
