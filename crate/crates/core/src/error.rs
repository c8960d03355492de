use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown vertex {0}")]
    UnknownVertex(usize),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("sampling failed: {0}")]
    Sampling(String),

    #[error("template error: {0}")]
    Template(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("scorer error: {0}")]
    Scorer(String),

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn file(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::File {
            path: path.into(),
            source,
        }
    }

    /// True for failures that originate in a scorer backend rather than in
    /// the harness inputs.
    pub fn is_scorer(&self) -> bool {
        matches!(self, Error::Scorer(_))
    }
}
