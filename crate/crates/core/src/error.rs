use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("input contains no records")]
    EmptyInput,

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("no users survive filtering")]
    NoUsers,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("signature widths differ ({left} vs {right} bits)")]
    WidthMismatch { left: usize, right: usize },

    #[error("need at least 2 users, got {0}")]
    TooFewUsers(usize),

    #[error("unknown user id {id} (graph has {n_users} users)")]
    UnknownUser { id: u32, n_users: usize },

    #[error("graph has no edges to average over")]
    EmptyGraph,

    #[error("exact graph has zero average similarity")]
    ZeroReference,

    #[error("every test set is empty")]
    EmptyTestSets,

    #[error("malformed {what}: {message}")]
    Format { what: &'static str, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(what: &'static str, message: impl Into<String>) -> Self {
        Error::Format {
            what,
            message: message.into(),
        }
    }
}
