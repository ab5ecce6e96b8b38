use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("graph has no edges")]
    EmptyGraph,

    #[error("graph is disconnected; spanning centrality is undefined")]
    Disconnected,

    #[error("vertex {0} has no neighbors; a walk cannot leave it")]
    IsolatedVertex(u32),

    #[error("graph has {n} vertices, above the exact oracle limit of {limit}")]
    TooLarge { n: usize, limit: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("branching trace is empty")]
    EmptyTrace,

    #[error("exact oracle routes disagree on edge ({u}, {v}): {resistance} vs {tree_ratio}")]
    OracleMismatch {
        u: u32,
        v: u32,
        resistance: f64,
        tree_ratio: f64,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
