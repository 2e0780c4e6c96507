use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: line {line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("edge {edge} references unknown node {node}")]
    DanglingNode { edge: String, node: String },
    #[error("edge {edge}: {msg}")]
    InvalidEdge { edge: String, msg: String },
    #[error("duplicate {kind} id {id}")]
    DuplicateId { kind: &'static str, id: String },
    #[error("network selection is empty")]
    EmptyNetwork,
    #[error("unknown node {0}")]
    UnknownNode(String),
    #[error("unknown edge {0}")]
    UnknownEdge(String),
    #[error("could not place {wanted} vehicles within {attempts} sampling attempts ({placed} placed)")]
    InfeasibleDemand {
        wanted: usize,
        placed: usize,
        attempts: usize,
    },
    #[error("no path from {from} to {to}")]
    NoPath { from: String, to: String },
    #[error("edges {0} and {1} are not consecutive")]
    DisconnectedPath(String, String),
    #[error("routes sampled with different intervals ({0} s and {1} s)")]
    MixedAlpha(f64, f64),
    #[error("instance too large for exhaustive search: {0}")]
    InstanceTooLarge(String),
    #[error("assignment has {got} bits, instance has {expected} variables")]
    LengthMismatch { expected: usize, got: usize },
    #[error("denominator is zero")]
    ZeroDenominator,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("missing input {}", .0.display())]
    MissingInput(PathBuf),
    #[error("stage {stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }
}
