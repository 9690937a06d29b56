use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("format error: {0}")]
    Format(String),

    /// A frame file is missing from an otherwise contiguous sequence.
    #[error("sequence error: missing frame index {missing}")]
    Sequence { missing: u64 },

    #[error("stream error: expected {expected} payload bytes, got {received}")]
    Stream { expected: u64, received: u64 },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("shape error: expected {expected:?}, got {found:?}")]
    Shape {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("scene spec error: {0}")]
    Spec(String),

    #[error("input error: {0}")]
    Input(String),
}

impl Error {
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_))
    }

    pub(crate) fn shape(expected: (usize, usize), found: (usize, usize)) -> Self {
        Error::Shape { expected, found }
    }
}
