use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty corpus")]
    EmptyCorpus,

    #[error("no bigram events")]
    NoBigramEvents,

    #[error("model assigns zero mass everywhere")]
    ZeroMass,

    #[error("no scorable events")]
    NoScorableEvents,

    #[error("empty {0} table")]
    EmptyTable(&'static str),

    #[error("invalid parameter: {0}")]
    Param(String),

    #[error("{path}: {source}")]
    Path {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed {what} at line {line}: {msg}")]
    Format {
        what: &'static str,
        line: usize,
        msg: String,
    },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Param(msg.into())
    }

    pub(crate) fn format(what: &'static str, line: usize, msg: impl Into<String>) -> Self {
        Error::Format {
            what,
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn at_path(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Path {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 2 usage/parameter, 3 data, 4 numeric failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Param(_) | Error::Path { .. } => 2,
            Error::ZeroMass => 4,
            Error::EmptyCorpus
            | Error::NoBigramEvents
            | Error::NoScorableEvents
            | Error::EmptyTable(_)
            | Error::Io(_)
            | Error::Format { .. } => 3,
        }
    }
}
