use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, BagaError>;

#[derive(Debug, Error)]
pub enum BagaError {
    #[error("invalid plasmid length {0}")]
    InvalidLength(usize),

    #[error("schema mismatch: {0}")]
    Schema(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Configuration problems carry the dotted key path that caused them.
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("fit error: {0}")]
    Fit(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed input {path}: {message}")]
    Input { path: PathBuf, message: String },
}

impl BagaError {
    pub fn param(msg: impl Into<String>) -> Self {
        BagaError::Parameter(msg.into())
    }

    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        BagaError::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        BagaError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            BagaError::Config { .. } => 2,
            BagaError::Fit(_) => 4,
            _ => 3,
        }
    }
}
