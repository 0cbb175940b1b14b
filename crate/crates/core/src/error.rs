use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{path}: {source}")]
    Dataset { path: String, source: Box<Error> },

    #[error("input contains no edges")]
    EmptyInput,

    #[error("edge probability {0} is outside [0, 1]")]
    ProbabilityOutOfRange(f64),

    #[error("edge {source_id} -> {target_id} has no probability assigned")]
    MissingProbability { source_id: u64, target_id: u64 },

    #[error("node {node} is assigned to more than one community")]
    DuplicateAssignment { node: u64 },

    #[error("node {node} from the community file is not present in the graph")]
    UnknownNode { node: u64 },

    #[error("node id {node} is out of range for a graph with {node_count} nodes")]
    NodeOutOfRange { node: usize, node_count: usize },

    #[error("community {0} is empty")]
    EmptyCommunity(usize),

    #[error("pruning removed every community")]
    EverythingPruned,

    #[error("budget k = {k} exceeds the number of nodes ({node_count})")]
    BudgetTooLarge { k: usize, node_count: usize },

    #[error("community {community} has {theta} RR sets but the truncation order is {q}")]
    TooFewSamples {
        community: usize,
        theta: usize,
        q: usize,
    },

    #[error("exact enumeration supports at most {max} edges, graph has {edges}")]
    TooManyEdges { edges: usize, max: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed RR-index snapshot: {0}")]
    Snapshot(String),

    #[error("serialization error: {0}")]
    Serialization(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// Attaches the dataset path to an error.
    pub fn in_file(path: impl AsRef<std::path::Path>, source: Error) -> Self {
        Error::Dataset {
            path: path.as_ref().display().to_string(),
            source: Box::new(source),
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}
