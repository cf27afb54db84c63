use thiserror::Error;

/// Coarse error category, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    Numeric,
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error in `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("{what} out of range: {detail}")]
    OutOfRange { what: &'static str, detail: String },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Config { .. } | Error::InvalidParameters(_) => ErrorCategory::Config,
            Error::Io(_) | Error::Json(_) => ErrorCategory::Io,
            _ => ErrorCategory::Numeric,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
