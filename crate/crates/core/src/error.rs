use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("duplicate usage id `{id}` on lines {first_line} and {second_line}")]
    DuplicateId {
        id: String,
        first_line: usize,
        second_line: usize,
    },

    #[error("invalid usage `{id}`: {message}")]
    InvalidUsage { id: String, message: String },

    #[error("unknown usage id `{0}`")]
    UnknownUsage(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no degraded queries: the corpus has no redundant usage with at least one call")]
    NoQueries,

    #[error("corpus has {size} usages, above the oracle cap of {cap}")]
    OracleCap { size: usize, cap: usize },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
