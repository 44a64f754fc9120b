use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its admissible range. `name` is the
    /// user-facing key (e.g. `gamma`), so CLI messages can point at it.
    #[error("invalid parameter `{name}`: {reason}")]
    Param { name: &'static str, reason: String },

    #[error("out-of-order timestamp {t}: falls in bin {bin}, but the sketch is already at bin {current_bin}")]
    Ordering { t: u64, bin: u64, current_bin: u64 },

    #[error("{path}:{line}: {reason}")]
    Parse {
        path: String,
        line: usize,
        reason: String,
    },

    #[error("label count {labels} does not match edge count {edges}")]
    Length { edges: usize, labels: usize },

    #[error("AUC is undefined: labels contain only one class")]
    UndefinedAuc,

    #[error("detector state: {0}")]
    State(&'static str),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Param {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad configuration rather than bad data.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::Param { .. })
    }
}
