use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or flag is outside its legal range, or unknown.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("division by zero in {0}")]
    DivisionByZero(&'static str),

    /// A metric whose defining formula has a zero denominator.
    #[error("metric undefined: {0}")]
    UndefinedMetric(&'static str),

    #[error("invalid state: {0}")]
    State(String),

    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
