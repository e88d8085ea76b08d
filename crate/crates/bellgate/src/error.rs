use std::io;
use std::path::PathBuf;

use bellgate_core::runner::RunError;

use crate::formats::FormatError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config not found: {}", .0.display())]
    ConfigNotFound(PathBuf),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("invalid config: {0}")]
    Config(String),
    #[error("invalid input: {0}")]
    Format(#[from] FormatError),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    /// 1 config or validation, 2 I/O, 3 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Format(_) | Self::Invalid(_) => 1,
            Self::ConfigNotFound(_) | Self::Io { .. } => 2,
            Self::Numerical(_) => 3,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }
}

impl From<RunError> for CliError {
    fn from(e: RunError) -> Self {
        match e {
            RunError::Config(_) | RunError::Source(_) => Self::Config(e.to_string()),
            RunError::Detection(_) => Self::Invalid(e.to_string()),
            RunError::Analysis(_) | RunError::ZeroCoincidenceRate => Self::Numerical(e.to_string()),
        }
    }
}
