use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("operand {value} out of range [{min}, {max}]")]
    OperandOutOfRange { value: i64, min: i64, max: i64 },

    #[error("configuration length {got} does not match expected {expected}")]
    ConfigLength { expected: usize, got: usize },

    #[error("value {value} out of range for a {len}-bit configuration")]
    ConfigRange { value: u64, len: usize },

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("duplicate configuration {0}")]
    DuplicateConfig(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("width mismatch: expected {expected} bits, got {got}")]
    WidthMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("schema mismatch: {0}")]
    Schema(String),

    #[error("incompatible model version: found {found}, expected {expected}")]
    Version { found: String, expected: String },

    #[error("checksum mismatch in {0}")]
    Checksum(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
