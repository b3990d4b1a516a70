//! Error type shared by every module.

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure class, used by the command line to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Data,
    Plugin,
    Internal,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("invalid series: {0}")]
    InvalidSeries(String),

    #[error("invalid mask: {0}")]
    InvalidMask(String),

    #[error("degenerate request: {0}")]
    Degenerate(String),

    #[error("block size error: {0}")]
    BlockSize(String),

    #[error("cannot impute: {0}")]
    Unimputable(String),

    #[error("degenerate range: {0}")]
    DegenerateRange(String),

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("unknown method `{0}`")]
    UnknownMethod(String),

    #[error("unknown metric `{0}`")]
    UnknownMetric(String),

    #[error("invalid parameter for `{method}`: {message}")]
    InvalidParam { method: String, message: String },

    #[error("plugin contract violated: {0}")]
    Plugin(String),

    #[error("incomplete input: {0}")]
    IncompleteInput(String),

    #[error("input error: {0}")]
    Input(String),

    #[error("method `{method}` at {percent}% missing, repetition {repetition}: {source}")]
    Cell {
        method: String,
        percent: f64,
        repetition: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Config(_)
            | Error::UnknownMethod(_)
            | Error::UnknownMetric(_)
            | Error::InvalidParam { .. } => ErrorClass::Usage,
            Error::LengthMismatch { .. }
            | Error::InvalidSeries(_)
            | Error::InvalidMask(_)
            | Error::Degenerate(_)
            | Error::BlockSize(_)
            | Error::Unimputable(_)
            | Error::DegenerateRange(_)
            | Error::UndefinedMetric(_)
            | Error::IncompleteInput(_)
            | Error::Input(_) => ErrorClass::Data,
            Error::Plugin(_) => ErrorClass::Plugin,
            Error::Cell { source, .. } => source.class(),
            Error::Io(_) | Error::Internal(_) => ErrorClass::Internal,
        }
    }

    pub(crate) fn param(method: &str, message: impl Into<String>) -> Self {
        Error::InvalidParam {
            method: method.to_string(),
            message: message.into(),
        }
    }
}
