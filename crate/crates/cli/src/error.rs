use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config `{path}`: {reason}")]
    Config { path: String, reason: String },
    #[error("cannot parse config: {0}")]
    Parse(#[source] serde_json::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("output directory {0} already holds results; pass --overwrite to replace them")]
    OutputExists(PathBuf),
    #[error(transparent)]
    Core(#[from] simlab_core::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
