use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid config: {field}: {reason}")]
    InvalidConfig { field: &'static str, reason: String },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("node {0} is dead")]
    DeadNode(usize),

    #[error("cluster has no members")]
    EmptyCluster,

    #[error("need {needed} alive nodes to seed, only {available} alive")]
    InsufficientAlive { needed: usize, available: usize },

    #[error("no alive nodes remain")]
    AllDead,

    #[error("unknown protocol `{0}`")]
    UnknownProtocol(String),

    #[error("unknown metric `{0}`")]
    UnknownMetric(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by bad input rather than the filesystem.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io { .. } | Error::Csv { .. })
    }
}
