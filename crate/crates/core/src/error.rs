use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("no feasible path")]
    NoFeasiblePath,
    #[error("layer {layer} exceeds the node cap of {cap}")]
    LayerExplosion { layer: usize, cap: usize },
    #[error("path count exceeds the cap of {cap}")]
    PathCapExceeded { cap: u128 },
    #[error("state count exceeds the cap of {cap}")]
    StateCapExceeded { cap: usize },
    #[error("model is infeasible")]
    Infeasible,
    #[error("model is unbounded")]
    Unbounded,
    #[error("simplex iteration cap of {cap} exceeded")]
    IterationCapExceeded { cap: usize },
    #[error("branch-and-bound node cap of {cap} exceeded")]
    NodeCapExceeded { cap: usize },
    #[error("{0}")]
    CapExceeded(String),
    #[error("time limit reached")]
    TimeLimit,
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
