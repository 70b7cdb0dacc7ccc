use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Every failure the structural and statistical layers can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("node name must not be empty")]
    EmptyName,
    #[error("node `{0}` is declared more than once")]
    DuplicateNode(String),
    #[error("edge {from} -> {to} refers to undeclared node `{missing}`")]
    DanglingEdge { from: String, to: String, missing: String },
    #[error("edge {0} -> {0} is a self-loop")]
    SelfLoop(String),
    #[error("edge {from} -> {to} is declared more than once")]
    DuplicateEdge { from: String, to: String },
    #[error("graph contains a directed cycle: {}", format_cycle(.0))]
    Cycle(Vec<String>),
    #[error("node `{0}` is both unobserved and conditioned (declare it with `force` to allow this)")]
    ConditionedUnobserved(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("`{0}` was given for both endpoints")]
    SameNode(String),
    #[error("position {index} is not an inner node of a path with {len} nodes")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("endpoint `{0}` is also in the conditioning set")]
    Overlap(String),
    #[error("more than {0} witness paths; refusing to truncate")]
    TooManyWitnesses(usize),
    #[error("predictor feature `{0}` is not a node of the graph")]
    UnknownPredictor(String),
    #[error("predictor name `{0}` is already a node")]
    NameCollision(String),
    #[error("predictor `{0}` has an empty feature set")]
    EmptyPredictorSet(String),
    #[error("`{0}` is not an attached predictor")]
    NotAPredictor(String),
    #[error("no coefficient for edge {from} -> {to}")]
    MissingCoefficient { from: String, to: String },
    #[error("coefficient given for {from} -> {to}, which is not an edge")]
    UnknownEdge { from: String, to: String },
    #[error("noise standard deviation of `{node}` must be positive and finite, got {value}")]
    NonPositiveNoise { node: String, value: f64 },
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("{n} samples are too few; at least {required} are needed")]
    InsufficientSamples { n: usize, required: usize },
    #[error("conditioning set is singular in the sample")]
    SingularConditioningSet,
    #[error("alpha must lie strictly between 0 and 1, got {0}")]
    AlphaOutOfRange(f64),
    #[error("selection fraction must lie in (0, 1], got {0}")]
    FractionOutOfRange(f64),
    #[error("no rows satisfy the selection on `{0}`")]
    EmptySelection(String),
}

fn format_cycle(names: &[String]) -> String {
    let mut out = String::new();
    for name in names {
        out.push_str(name);
        out.push_str(" -> ");
    }
    if let Some(first) = names.first() {
        out.push_str(first);
    }
    out
}
