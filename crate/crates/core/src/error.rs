use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A required column is absent from a CSV header.
    #[error("{file}: missing required column `{column}`")]
    MissingColumn { file: String, column: String },

    /// A cell could not be converted to the expected type. `line` is the
    /// 1-based line number in the file (the header is line 1).
    #[error("{file}: line {line}: column `{column}`: cannot parse {value:?}")]
    Parse {
        file: String,
        line: u64,
        column: String,
        value: String,
    },

    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("assignment problem is infeasible: {0}")]
    Infeasible(String),

    #[error("solver timed out after {0:?}")]
    Timeout(std::time::Duration),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
