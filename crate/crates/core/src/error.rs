use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("vertex {vertex} out of range for n={n}")]
    VertexOutOfRange { vertex: u64, n: usize },

    #[error("labeling inconsistent with edge ({u}, {v})")]
    InconsistentLabeling { u: u32, v: u32 },

    #[error("{name}: argument out of domain: {msg}")]
    Domain { name: &'static str, msg: String },

    #[error("oracle refuses n={n} (cap {cap})")]
    OracleCap { n: usize, cap: usize },

    #[error("regime not covered: {0}")]
    Regime(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("trial {index} failed: {source}")]
    Trial {
        index: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(name: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain {
            name,
            msg: msg.into(),
        }
    }
}
