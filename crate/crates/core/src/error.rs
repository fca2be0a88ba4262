use thiserror::Error;

/// Errors produced by the numerical and statistical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical procedure ran out of budget before reaching its tolerance.
    /// The best available estimate is carried along.
    #[error("accuracy error: {message} (estimate {estimate}, error bound {error_bound})")]
    Accuracy {
        message: String,
        estimate: f64,
        error_bound: f64,
    },

    /// Input data violated a structural invariant (norms, label lengths, row shapes).
    #[error("validation error: {0}")]
    Validation(String),

    /// Reading or writing a file failed.
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
