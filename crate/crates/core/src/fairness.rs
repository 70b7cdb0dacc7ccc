//! Prediction nodes and the independence / separation / sufficiency criteria,
//! evaluated on graph structure and set against the disparity verdicts.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::bias::has_disparity;
use crate::error::{Error, Result};
use crate::graph::{Dag, EdgeDecl, NodeDecl};
use crate::paths::{d_separated, PathTrace};

/// A prediction computed from a set of features.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PredictorSpec {
    pub name: String,
    pub predictor_set: BTreeSet<String>,
    /// The prediction is an invertible function of its single feature.
    pub deterministic: bool,
}

impl PredictorSpec {
    pub fn new<I, S>(name: impl Into<String>, features: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        PredictorSpec {
            name: name.into(),
            predictor_set: features.into_iter().map(Into::into).collect(),
            deterministic: false,
        }
    }

    pub fn deterministic(mut self) -> Self {
        self.deterministic = true;
        self
    }
}

/// Adds the prediction as a leaf whose parents are exactly its features.
pub fn attach_predictor(dag: &Dag, spec: &PredictorSpec) -> Result<Dag> {
    if spec.predictor_set.is_empty() {
        return Err(Error::EmptyPredictorSet(spec.name.clone()));
    }
    if dag.contains(&spec.name) {
        return Err(Error::NameCollision(spec.name.clone()));
    }
    for feature in &spec.predictor_set {
        if feature == &spec.name || !dag.contains(feature) {
            return Err(Error::UnknownPredictor(feature.clone()));
        }
    }
    let mut nodes = dag.nodes().to_vec();
    nodes.push(NodeDecl::new(spec.name.clone()));
    let mut edges = dag.edges().to_vec();
    edges.extend(
        spec.predictor_set
            .iter()
            .map(|f| EdgeDecl::new(f.clone(), spec.name.clone())),
    );
    let mut predictors = dag.predictors().to_vec();
    predictors.push(spec.clone());
    Dag::build_with_predictors(nodes, edges, predictors)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum SufficiencyMode {
    /// `Y ⊥ X | Ŷ` read off the graph as drawn.
    Structural,
    /// Conditioning on `Ŷ` replaced by conditioning on its single feature.
    Deterministic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(
    feature = "serde",
    serde(rename_all = "lowercase", tag = "criterion", content = "mode")
)]
pub enum Criterion {
    Independence,
    Separation,
    Sufficiency(SufficiencyMode),
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Criterion::Independence => "independence",
            Criterion::Separation => "separation",
            Criterion::Sufficiency(SufficiencyMode::Structural) => "sufficiency (structural)",
            Criterion::Sufficiency(SufficiencyMode::Deterministic) => "sufficiency (deterministic)",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Verdict {
    Holds,
    Fails,
    NotApplicable,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::NotApplicable => "not-applicable",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CriterionOutcome {
    pub criterion: Criterion,
    pub verdict: Verdict,
    /// Open paths that make the criterion fail.
    pub open_paths: Vec<PathTrace>,
}

impl CriterionOutcome {
    fn from_dsep(criterion: Criterion, dag: &Dag, a: &str, b: &str, given: &BTreeSet<&str>) -> Result<Self> {
        let verdict = d_separated(dag, a, b, given)?;
        Ok(CriterionOutcome {
            criterion,
            verdict: if verdict.separated {
                Verdict::Holds
            } else {
                Verdict::Fails
            },
            open_paths: verdict.open_paths,
        })
    }

    fn not_applicable(criterion: Criterion) -> Self {
        CriterionOutcome {
            criterion,
            verdict: Verdict::NotApplicable,
            open_paths: Vec::new(),
        }
    }
}

/// Evaluates one criterion for the interest `x`, outcome `y` and attached
/// prediction `yhat`.
pub fn check_criterion(dag: &Dag, criterion: Criterion, x: &str, y: &str, yhat: &str) -> Result<CriterionOutcome> {
    dag.require(x)?;
    dag.require(y)?;
    let spec = dag
        .predictor(yhat)
        .ok_or_else(|| Error::NotAPredictor(yhat.to_string()))?;
    for role in [x, y] {
        if role == yhat {
            return Err(Error::SameNode(role.to_string()));
        }
    }
    if x == y {
        return Err(Error::SameNode(x.to_string()));
    }

    match criterion {
        Criterion::Independence => CriterionOutcome::from_dsep(criterion, dag, x, yhat, &BTreeSet::new()),
        Criterion::Separation => CriterionOutcome::from_dsep(criterion, dag, yhat, x, &BTreeSet::from([y])),
        Criterion::Sufficiency(SufficiencyMode::Structural) => {
            CriterionOutcome::from_dsep(criterion, dag, y, x, &BTreeSet::from([yhat]))
        }
        Criterion::Sufficiency(SufficiencyMode::Deterministic) => {
            let single = spec.predictor_set.len() == 1;
            let feature = spec.predictor_set.iter().next().map(String::as_str);
            match feature {
                Some(f) if spec.deterministic && single && f != x && f != y => {
                    CriterionOutcome::from_dsep(criterion, dag, y, x, &BTreeSet::from([f]))
                }
                _ => Ok(CriterionOutcome::not_applicable(criterion)),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FairnessReport {
    pub independence: CriterionOutcome,
    pub separation: CriterionOutcome,
    pub sufficiency_structural: CriterionOutcome,
    pub sufficiency_deterministic: CriterionOutcome,
    pub disparity_in_outcome: bool,
    pub disparity_in_prediction: bool,
}

impl FairnessReport {
    pub fn outcomes(&self) -> [&CriterionOutcome; 4] {
        [
            &self.independence,
            &self.separation,
            &self.sufficiency_structural,
            &self.sufficiency_deterministic,
        ]
    }
}

pub fn fairness_report(dag: &Dag, x: &str, y: &str, yhat: &str) -> Result<FairnessReport> {
    Ok(FairnessReport {
        independence: check_criterion(dag, Criterion::Independence, x, y, yhat)?,
        separation: check_criterion(dag, Criterion::Separation, x, y, yhat)?,
        sufficiency_structural: check_criterion(dag, Criterion::Sufficiency(SufficiencyMode::Structural), x, y, yhat)?,
        sufficiency_deterministic: check_criterion(
            dag,
            Criterion::Sufficiency(SufficiencyMode::Deterministic),
            x,
            y,
            yhat,
        )?,
        disparity_in_outcome: has_disparity(dag, x, y)?.present,
        disparity_in_prediction: has_disparity(dag, x, yhat)?.present,
    })
}
