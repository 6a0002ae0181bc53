use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// A flag or config key has a bad value.
    #[error("invalid value for --{key}: {message}")]
    Invalid { key: String, message: String },
    #[error("unknown config key `{key}` on line {line}")]
    UnknownKey { key: String, line: usize },
    #[error("malformed config line {line}: {text}")]
    Syntax { line: usize, text: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("problem file {path}: {message}")]
    Problem { path: PathBuf, message: String },
    #[error(transparent)]
    Core(#[from] hhfd::Error),
}

impl CliError {
    pub fn invalid(key: &str, message: impl Into<String>) -> Self {
        CliError::Invalid {
            key: key.to_string(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
