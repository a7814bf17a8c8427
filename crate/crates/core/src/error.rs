use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("numerical failure in {context}: achieved error {achieved:.3e} exceeds tolerance {tolerance:.3e} after {evaluations} evaluations")]
    NumericalFailure {
        context: &'static str,
        achieved: f64,
        tolerance: f64,
        evaluations: usize,
    },

    #[error("conditional expectation undefined: {0}")]
    UndefinedConditional(String),

    #[error("ratio undefined: {0}")]
    UndefinedRatio(String),

    #[error("input format error at line {line}: {message}")]
    InputFormat { line: usize, message: String },

    #[error("configuration error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
