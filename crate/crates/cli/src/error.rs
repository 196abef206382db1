use std::path::PathBuf;

use demand_core::Error as CoreError;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error("missing input {}: {reason}", path.display())]
    MissingInput { path: PathBuf, reason: String },

    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: CoreError,
    },
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn missing(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        CliError::MissingInput {
            path: path.into(),
            reason: reason.into(),
        }
    }

    /// 1 validation failure, 2 missing input, 3 internal invariant violation.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::MissingInput { .. } => 2,
            CliError::Core { source, .. } => match source {
                CoreError::MissingInput { .. } => 2,
                CoreError::Io(e) if e.kind() == std::io::ErrorKind::NotFound => 2,
                CoreError::Integrity(_) => 3,
                CoreError::GridPoint { source, .. }
                    if matches!(**source, CoreError::Integrity(_)) =>
                {
                    3
                }
                _ => 1,
            },
        }
    }
}

/// Attaches a short description of what was being done to a core error.
pub trait Context<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T>;
}

impl<T> Context<T> for std::result::Result<T, CoreError> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T> {
        self.map_err(|source| CliError::Core {
            context: what(),
            source,
        })
    }
}

impl<T> Context<T> for std::io::Result<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T> {
        self.map_err(|e| CliError::Core {
            context: what(),
            source: CoreError::Io(e),
        })
    }
}
