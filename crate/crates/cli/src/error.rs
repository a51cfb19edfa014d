use std::path::PathBuf;
use std::process::ExitCode;

use poolcore::sim::SimError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    MissingFile { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Malformed { path: PathBuf, message: String },
    #[error("run failed: {0}")]
    Run(SimError),
    #[error("cannot write {path}: {message}")]
    Output { path: String, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Output { .. } => 1,
            CliError::Usage(_) | CliError::MissingFile { .. } => 2,
            CliError::Malformed { .. } => 3,
            CliError::Run(_) => 4,
        })
    }

    /// Classifies an error raised while loading `path`.
    pub fn loading(path: &std::path::Path, err: SimError) -> Self {
        match err {
            SimError::Io { path, source } => CliError::MissingFile { path, source },
            other => CliError::Malformed { path: path.to_path_buf(), message: other.to_string() },
        }
    }
}
