use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("duplicate id `{0}`")]
    DuplicateId(String),

    #[error("index is empty")]
    EmptyIndex,

    #[error("corrupt index image ({section}): {detail}")]
    CorruptIndex { section: &'static str, detail: String },

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("line {line}: dimension drift, corpus dimension is {expected} but record has {found}")]
    DimensionDrift { line: u64, expected: usize, found: usize },

    #[error("embedding request failed: {0}")]
    Embed(String),

    #[error("interrupted before all inputs were processed")]
    Interrupted,

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn parse(line: u64, msg: impl Into<String>) -> Self {
        Error::Parse { line, message: msg.into() }
    }

    /// True for errors caused by bad input data rather than the environment.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::DimensionMismatch { .. }
                | Error::DuplicateId(_)
                | Error::EmptyIndex
                | Error::CorruptIndex { .. }
                | Error::Parse { .. }
                | Error::DimensionDrift { .. }
        )
    }
}
