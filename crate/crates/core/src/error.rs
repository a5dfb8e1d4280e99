use std::fmt;

use thiserror::Error;

/// Errors raised by the decoding engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("coverage violation: {0}")]
    Coverage(String),

    #[error("invalid distribution: {0}")]
    Distribution(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("provider error: {0}")]
    Provider(String),

    #[error("missing window: no record for start={start}, len={len}")]
    MissingWindow { start: usize, len: usize },

    #[error("transcript hash mismatch: file has {expected}, transcript hashes to {actual}")]
    HashMismatch { expected: String, actual: String },

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Machine-readable error category, stable across releases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    Coverage,
    Distribution,
    Input,
    Parse,
    Provider,
    Geometry,
    Integrity,
    Mismatch,
    Io,
}

impl ErrorCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCategory::Config => "config",
            ErrorCategory::Coverage => "coverage",
            ErrorCategory::Distribution => "distribution",
            ErrorCategory::Input => "input",
            ErrorCategory::Parse => "parse",
            ErrorCategory::Provider => "provider",
            ErrorCategory::Geometry => "geometry",
            ErrorCategory::Integrity => "integrity",
            ErrorCategory::Mismatch => "mismatch",
            ErrorCategory::Io => "io",
        }
    }
}

impl fmt::Display for ErrorCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Config(_) => ErrorCategory::Config,
            Error::Coverage(_) => ErrorCategory::Coverage,
            Error::Distribution(_) => ErrorCategory::Distribution,
            Error::Input(_) => ErrorCategory::Input,
            Error::Parse { .. } => ErrorCategory::Parse,
            Error::Provider(_) => ErrorCategory::Provider,
            Error::MissingWindow { .. } => ErrorCategory::Geometry,
            Error::HashMismatch { .. } => ErrorCategory::Integrity,
            Error::LengthMismatch(_) => ErrorCategory::Mismatch,
            Error::Io { .. } => ErrorCategory::Io,
        }
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn parse(path: &str, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.to_string(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
