use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use super::scm::{sample, SampleTable, ScmSpec};
use super::stats::{check_alpha, partial_correlation_from_covariance, CiTestResult};
use crate::error::{Error, Result};
use crate::graph::Dag;
use crate::paths::d_separated;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaithfulnessConfig {
    pub samples: usize,
    pub alpha: f64,
    /// Largest conditioning set size tried.
    pub max_given: usize,
    pub seed: u64,
}

/// One structural verdict set against one statistical verdict.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TripleCheck {
    pub x: String,
    pub y: String,
    /// Effective conditioning set, including nodes the model marks as conditioned.
    pub given: Vec<String>,
    pub d_separated: bool,
    pub test: CiTestResult,
}

impl TripleCheck {
    pub fn agrees(&self) -> bool {
        self.d_separated == self.test.independent
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FaithfulnessReport {
    pub checks: Vec<TripleCheck>,
}

impl FaithfulnessReport {
    pub fn agreements(&self) -> usize {
        self.checks.iter().filter(|c| c.agrees()).count()
    }

    /// d-separated, but the test rejected independence (Type-I-like).
    pub fn false_dependencies(&self) -> usize {
        self.checks
            .iter()
            .filter(|c| c.d_separated && !c.test.independent)
            .count()
    }

    /// d-connected, but the test accepted independence (Type-II-like).
    pub fn missed_dependencies(&self) -> usize {
        self.checks
            .iter()
            .filter(|c| !c.d_separated && c.test.independent)
            .count()
    }

    pub fn mismatches(&self) -> usize {
        self.checks.len() - self.agreements()
    }
}

/// Samples from `scm` and compares every d-separation verdict over observed
/// pairs and observed conditioning sets up to `max_given` with a Fisher-z
/// test on the sample.
pub fn faithfulness_check(scm: &ScmSpec, config: &FaithfulnessConfig) -> Result<FaithfulnessReport> {
    check_alpha(config.alpha)?;
    let table = sample(scm, config.samples, config.seed)?;
    check_table(&scm.dag, &table, config.alpha, config.max_given)
}

/// As [`faithfulness_check`] on an existing table.
pub fn check_table(dag: &Dag, table: &SampleTable, alpha: f64, max_given: usize) -> Result<FaithfulnessReport> {
    check_alpha(alpha)?;
    let declared: BTreeSet<&str> = dag.conditioned();
    let candidates: Vec<&str> = dag
        .nodes()
        .iter()
        .filter(|n| !n.unobserved && !n.conditioned)
        .map(|n| n.name.as_str())
        .collect();
    let declared_idx = declared
        .iter()
        .map(|n| table.column_index(n))
        .collect::<Result<Vec<_>>>()?;
    let all: Vec<usize> = (0..table.names().len()).collect();
    let cov = table.covariance(&all);
    let n = table.n();

    let mut checks = Vec::new();
    for (a, &x) in candidates.iter().enumerate() {
        for &y in &candidates[a + 1..] {
            let rest: Vec<&str> = candidates.iter().copied().filter(|c| *c != x && *c != y).collect();
            for subset in subsets_up_to(rest.len(), max_given) {
                let extra: BTreeSet<&str> = subset.iter().map(|&k| rest[k]).collect();
                let verdict = d_separated(dag, x, y, &extra)?;
                let mut idx = Vec::with_capacity(2 + extra.len() + declared_idx.len());
                idx.push(table.column_index(x)?);
                idx.push(table.column_index(y)?);
                for name in &verdict.conditioning_set {
                    idx.push(table.column_index(name)?);
                }
                let given_len = idx.len() - 2;
                if n < given_len + 4 {
                    return Err(Error::InsufficientSamples {
                        n,
                        required: given_len + 4,
                    });
                }
                let sub = cov.select_rows(&idx).select_columns(&idx);
                let r = partial_correlation_from_covariance(&sub)?;
                checks.push(TripleCheck {
                    x: x.into(),
                    y: y.into(),
                    given: verdict.conditioning_set.into_iter().collect(),
                    d_separated: verdict.separated,
                    test: CiTestResult::from_correlation(r, n, given_len, alpha),
                });
            }
        }
    }
    Ok(FaithfulnessReport { checks })
}

/// Index subsets of `0..n` with at most `k` members, smallest first.
fn subsets_up_to(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn grow(start: usize, n: usize, k: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        out.push(current.clone());
        if current.len() == k {
            return;
        }
        for i in start..n {
            current.push(i);
            grow(i + 1, n, k, current, out);
            current.pop();
        }
    }
    grow(0, n, k, &mut current, &mut out);
    out.sort_by_key(Vec::len);
    out
}
