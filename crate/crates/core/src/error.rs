use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("wrong window topology: {0}")]
    Topology(String),

    #[error("mark-space mismatch at point {index}: expected {expected}, found {found}")]
    MarkSpace {
        index: usize,
        expected: &'static str,
        found: String,
    },

    #[error("optimization mark of point {0} is unset")]
    UnsetMark(usize),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("work limit exceeded: {required} evaluations requested, cap is {cap}")]
    WorkCap { required: u128, cap: u128 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("internal assertion failed: {0}")]
    Assertion(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn assertion(msg: impl Into<String>) -> Self {
        Error::Assertion(msg.into())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
