use std::fmt;

use specstat_core::ErrorCategory;
use thiserror::Error;

/// One configuration problem, located by its dotted key path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    pub key: String,
    pub message: String,
}

impl Issue {
    pub fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            key: key.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.key, self.message)
    }
}

fn list(issues: &[Issue]) -> String {
    issues.iter().map(|i| format!("\n  {i}")).collect()
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration:{}", list(.0))]
    Config(Vec<Issue>),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("I/O failure: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub const EXIT_CONFIG: i32 = 2;
    pub const EXIT_NUMERIC: i32 = 3;
    pub const EXIT_IO: i32 = 4;

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => Self::EXIT_CONFIG,
            CliError::Numeric(_) => Self::EXIT_NUMERIC,
            CliError::Io(_) => Self::EXIT_IO,
        }
    }

    pub fn issues(&self) -> &[Issue] {
        match self {
            CliError::Config(v) => v,
            _ => &[],
        }
    }
}

impl From<specstat_core::Error> for CliError {
    fn from(e: specstat_core::Error) -> Self {
        match (e.category(), e) {
            (_, specstat_core::Error::Config { key, message }) => CliError::Config(vec![Issue::new(key, message)]),
            (_, specstat_core::Error::Io(io)) => CliError::Io(io),
            (ErrorCategory::Config, e) => CliError::Config(vec![Issue::new("experiment", e.to_string())]),
            (ErrorCategory::Io, e) => CliError::Io(std::io::Error::other(e.to_string())),
            (ErrorCategory::Numeric, e) => CliError::Numeric(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
