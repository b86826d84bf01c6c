use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    /// The session ran but the keys could not be reconciled.
    #[error("decoding failed: {0}")]
    DecodeFailed(String),
    #[error("transport: {0}")]
    Transport(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::DecodeFailed(_) => ExitCode::from(2),
            CliError::Config(_) | CliError::Io { .. } => ExitCode::from(3),
            CliError::Transport(_) => ExitCode::from(4),
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.as_ref().display().to_string();
        move |source| CliError::Io { path, source }
    }
}

impl From<recon::protocol::Error> for CliError {
    fn from(e: recon::protocol::Error) -> Self {
        if e.is_transport() {
            CliError::Transport(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

impl From<recon::ldpc::Error> for CliError {
    fn from(e: recon::ldpc::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<recon::rate_adapt::Error> for CliError {
    fn from(e: recon::rate_adapt::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<recon::harness::sweep::Error> for CliError {
    fn from(e: recon::harness::sweep::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
