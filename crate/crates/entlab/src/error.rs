use std::path::PathBuf;

use thiserror::Error;

/// Input and configuration failures. All of them exit with code 2.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),

    #[error("state file {path}: {source}")]
    StateFile {
        path: PathBuf,
        source: crate::statefile::StateFileError,
    },

    #[error(transparent)]
    Core(#[from] entlab_core::Error),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }
}
