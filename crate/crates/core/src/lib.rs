//! Structural causal-graph analysis for bias and disparity questions.
//!
//! * [`graph`]: immutable annotated DAGs and kinship queries.
//! * [`paths`]: undirected paths, node roles, d-separation.
//! * [`bias`]: bias (unjustified direct edge) and disparity (directed path
//!   through an unjustified edge) predicates with witnesses.
//! * [`fairness`]: prediction nodes and the independence, separation and
//!   sufficiency criteria.
//! * [`sim`]: linear-Gaussian simulation and conditional-independence tests
//!   used to check structural verdicts against data.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

pub mod bias;
pub mod error;
pub mod fairness;
pub mod graph;
pub mod paths;
pub mod sim;

pub use bias::{has_disparity, is_bias, unfair_nodes, DisparityVerdict, Witness};
pub use error::{Error, Result};
pub use fairness::{
    attach_predictor, check_criterion, fairness_report, Criterion, CriterionOutcome, FairnessReport, PredictorSpec,
    SufficiencyMode, Verdict,
};
pub use graph::{Dag, EdgeDecl, NodeDecl, Relation};
pub use paths::{d_separated, enumerate_paths, node_role, path_status, DsepVerdict, PathTrace, Role, Status};
