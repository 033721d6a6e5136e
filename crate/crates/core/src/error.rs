use thiserror::Error;

/// Errors produced anywhere in the simulation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A text input could not be parsed.
    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    /// A scene or pattern grid failed validation.
    #[error("invalid geometry: {0}")]
    Geometry(String),

    /// A keyed lookup (correction table, pattern set) had no entry.
    #[error("lookup failed: {0}")]
    Lookup(String),

    /// A run configuration is inconsistent or unreadable.
    #[error("config error: {0}")]
    Config(String),

    /// A computation produced a non-finite or degenerate result.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Coarse classification used by the command line front end to pick an
/// exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Data,
    Numerical,
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn parse(line: u64, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Config(_) => ErrorClass::Config,
            Error::Domain(_) | Error::Numerical(_) => ErrorClass::Numerical,
            Error::Parse { .. } | Error::Geometry(_) | Error::Lookup(_) | Error::Io(_) => {
                ErrorClass::Data
            }
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
