//! Bias and disparity predicates.
//!
//! A bias of `x` in `y` is a direct edge `x -> y` annotated as unjustified.
//! A disparity of `x` in `y` is a directed path from `x` to `y` carrying at
//! least one unjustified edge. Which edges are unjustified is always an input.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::graph::Dag;

/// Witness enumeration stops with [`Error::TooManyWitnesses`] beyond this.
pub const DEFAULT_WITNESS_CAP: usize = 10_000;

/// A directed path with the unjustified links marked.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Witness {
    pub nodes: Vec<String>,
    /// `biased[k]` describes the edge `nodes[k] -> nodes[k + 1]`.
    pub biased: Vec<bool>,
}

impl Witness {
    pub fn biased_edges(&self) -> impl Iterator<Item = (&str, &str)> {
        self.biased
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(|(k, _)| (self.nodes[k].as_str(), self.nodes[k + 1].as_str()))
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, node) in self.nodes.iter().enumerate() {
            if k > 0 {
                f.write_str(if self.biased[k - 1] { " => " } else { " -> " })?;
            }
            f.write_str(node)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DisparityVerdict {
    pub present: bool,
    pub witnesses: Vec<Witness>,
}

pub fn is_bias(dag: &Dag, x: &str, y: &str) -> Result<bool> {
    dag.require(x)?;
    dag.require(y)?;
    Ok(dag.edge(x, y).is_some_and(|e| e.unjustified))
}

pub fn has_disparity(dag: &Dag, x: &str, y: &str) -> Result<DisparityVerdict> {
    has_disparity_capped(dag, x, y, DEFAULT_WITNESS_CAP)
}

/// As [`has_disparity`] with an explicit witness limit.
pub fn has_disparity_capped(dag: &Dag, x: &str, y: &str, cap: usize) -> Result<DisparityVerdict> {
    let start = dag.require(x)?;
    let goal = dag.require(y)?;
    let mut witnesses = Vec::new();
    if start != goal {
        // Only nodes that can still reach the goal are worth descending into.
        let mut reaches_goal = vec![false; dag.len()];
        reaches_goal[goal] = true;
        for &i in dag.topo_ids().iter().rev() {
            if dag.child_ids(i).iter().any(|&c| reaches_goal[c]) {
                reaches_goal[i] = true;
            }
        }
        let mut path = vec![start];
        let mut flags = Vec::new();
        directed_walk(dag, goal, &reaches_goal, &mut path, &mut flags, cap, &mut witnesses)?;
    }
    witnesses.sort_by(|a, b| a.nodes.cmp(&b.nodes));
    Ok(DisparityVerdict {
        present: !witnesses.is_empty(),
        witnesses,
    })
}

fn directed_walk(
    dag: &Dag,
    goal: usize,
    reaches_goal: &[bool],
    path: &mut Vec<usize>,
    flags: &mut Vec<bool>,
    cap: usize,
    out: &mut Vec<Witness>,
) -> Result<()> {
    let here = *path.last().expect("non-empty");
    for &next in dag.child_ids(here) {
        if !reaches_goal[next] {
            continue;
        }
        let biased = dag
            .edge(dag.name_of(here), dag.name_of(next))
            .is_some_and(|e| e.unjustified);
        path.push(next);
        flags.push(biased);
        if next == goal {
            if flags.iter().any(|b| *b) {
                if out.len() == cap {
                    return Err(Error::TooManyWitnesses(cap));
                }
                out.push(Witness {
                    nodes: path.iter().map(|&i| dag.name_of(i).into()).collect(),
                    biased: flags.clone(),
                });
            }
        } else {
            directed_walk(dag, goal, reaches_goal, path, flags, cap, out)?;
        }
        path.pop();
        flags.pop();
    }
    Ok(())
}

/// Every node in which `x` has a disparity.
///
/// Computed directly from the unjustified edges: the target of any biased
/// edge whose source is `x` or downstream of it, plus everything downstream of
/// that target. In a DAG these concatenated directed paths are always simple.
pub fn unfair_nodes<'a>(dag: &'a Dag, x: &str) -> Result<BTreeSet<&'a str>> {
    let start = dag.require(x)?;
    let mut upstream = vec![false; dag.len()];
    upstream[start] = true;
    for d in dag.descendant_ids(start) {
        upstream[d] = true;
    }
    let mut unfair = BTreeSet::new();
    for edge in dag.edges().iter().filter(|e| e.unjustified) {
        let source = dag.require(&edge.source)?;
        if !upstream[source] {
            continue;
        }
        let target = dag.require(&edge.target)?;
        unfair.insert(dag.name_of(target));
        unfair.extend(dag.descendant_ids(target).into_iter().map(|i| dag.name_of(i)));
    }
    Ok(unfair)
}
