//! Undirected paths, node roles, open/closed status and d-separation.
//!
//! The canonical decision procedure enumerates every simple undirected path
//! so that open paths can be reported as witnesses. [`reachable_connected`]
//! is a linear-time alternative that answers the same question without
//! witnesses.

use alloc::collections::{BTreeSet, VecDeque};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::graph::Dag;

/// Orientation of one link of a path, relative to the path's reading order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Direction {
    /// `a -> b`
    Forward,
    /// `a <- b`
    Backward,
}

impl Direction {
    fn flipped(self) -> Self {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Role {
    Mediator,
    Confounder,
    Collider,
}

impl Role {
    pub fn from_arrows(incoming: Direction, outgoing: Direction) -> Role {
        match (incoming, outgoing) {
            (Direction::Forward, Direction::Backward) => Role::Collider,
            (Direction::Backward, Direction::Forward) => Role::Confounder,
            _ => Role::Mediator,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Role::Mediator => "mediator",
            Role::Confounder => "confounder",
            Role::Collider => "collider",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Status {
    Open,
    Closed,
}

impl Status {
    pub fn is_open(self) -> bool {
        self == Status::Open
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Open => "open",
            Status::Closed => "closed",
        })
    }
}

/// A simple undirected path with its inner-node roles and status under some
/// conditioning set.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PathTrace {
    pub nodes: Vec<String>,
    pub arrows: Vec<Direction>,
    /// One entry per inner node, i.e. `nodes[1..len - 1]`.
    pub roles: Vec<Role>,
    pub status: Status,
    /// Inner nodes that are closed under the conditioning set.
    pub blocking_nodes: BTreeSet<String>,
}

impl PathTrace {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// The same path read from the other end.
    pub fn reversed(&self) -> PathTrace {
        let mut nodes = self.nodes.clone();
        nodes.reverse();
        let arrows = self.arrows.iter().rev().map(|d| d.flipped()).collect();
        let mut roles = self.roles.clone();
        roles.reverse();
        PathTrace {
            nodes,
            arrows,
            roles,
            status: self.status,
            blocking_nodes: self.blocking_nodes.clone(),
        }
    }
}

impl fmt::Display for PathTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, node) in self.nodes.iter().enumerate() {
            if i > 0 {
                f.write_str(match self.arrows[i - 1] {
                    Direction::Forward => " -> ",
                    Direction::Backward => " <- ",
                })?;
            }
            f.write_str(node)?;
        }
        Ok(())
    }
}

/// Why an inner node is open or closed.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NodeState {
    pub node: String,
    pub role: Role,
    pub conditioned: bool,
    /// For a collider that is not itself conditioned: the first conditioned
    /// descendant (declaration order) that opens it.
    pub opened_by_descendant: Option<String>,
    pub open: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PathStatus {
    pub status: Status,
    pub inner: Vec<NodeState>,
}

impl PathStatus {
    pub fn blocking_nodes(&self) -> BTreeSet<String> {
        self.inner.iter().filter(|s| !s.open).map(|s| s.node.clone()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DsepVerdict {
    pub separated: bool,
    pub open_paths: Vec<PathTrace>,
    /// The effective conditioning set: the query's set plus nodes the model
    /// itself marks as conditioned.
    pub conditioning_set: BTreeSet<String>,
}

/// All simple undirected paths from `x` to `y`, ordered lexicographically by
/// node sequence, with status computed against the graph's own conditioned
/// nodes.
pub fn enumerate_paths(dag: &Dag, x: &str, y: &str) -> Result<Vec<PathTrace>> {
    let declared: BTreeSet<&str> = dag.conditioned();
    enumerate_paths_given(dag, x, y, &declared)
}

fn enumerate_paths_given(dag: &Dag, x: &str, y: &str, conditioned: &BTreeSet<&str>) -> Result<Vec<PathTrace>> {
    let start = dag.require(x)?;
    let goal = dag.require(y)?;
    if start == goal {
        return Err(Error::SameNode(x.to_string()));
    }
    let conditioned_ids = ids_of(dag, conditioned)?;

    let mut raw: Vec<(Vec<usize>, Vec<Direction>)> = Vec::new();
    let mut on_path = vec![false; dag.len()];
    let mut nodes = vec![start];
    let mut arrows = Vec::new();
    on_path[start] = true;
    walk(dag, goal, &mut on_path, &mut nodes, &mut arrows, &mut raw);

    let mut traces: Vec<PathTrace> = raw
        .into_iter()
        .map(|(ids, arrows)| trace_from_ids(dag, &ids, arrows, &conditioned_ids))
        .collect();
    traces.sort_by(|a, b| a.nodes.cmp(&b.nodes));
    Ok(traces)
}

fn walk(
    dag: &Dag,
    goal: usize,
    on_path: &mut [bool],
    nodes: &mut Vec<usize>,
    arrows: &mut Vec<Direction>,
    out: &mut Vec<(Vec<usize>, Vec<Direction>)>,
) {
    let here = *nodes.last().expect("path is never empty");
    let steps = dag
        .child_ids(here)
        .iter()
        .map(|&c| (c, Direction::Forward))
        .chain(dag.parent_ids(here).iter().map(|&p| (p, Direction::Backward)));
    for (next, dir) in steps {
        if on_path[next] {
            continue;
        }
        nodes.push(next);
        arrows.push(dir);
        if next == goal {
            out.push((nodes.clone(), arrows.clone()));
        } else {
            on_path[next] = true;
            walk(dag, goal, on_path, nodes, arrows, out);
            on_path[next] = false;
        }
        nodes.pop();
        arrows.pop();
    }
}

fn trace_from_ids(dag: &Dag, ids: &[usize], arrows: Vec<Direction>, conditioned: &[bool]) -> PathTrace {
    let roles: Vec<Role> = arrows.windows(2).map(|w| Role::from_arrows(w[0], w[1])).collect();
    let mut blocking_nodes = BTreeSet::new();
    for (k, role) in roles.iter().enumerate() {
        let id = ids[k + 1];
        if !inner_open(dag, id, *role, conditioned).0 {
            blocking_nodes.insert(dag.name_of(id).to_string());
        }
    }
    PathTrace {
        nodes: ids.iter().map(|&i| dag.name_of(i).to_string()).collect(),
        arrows,
        roles,
        status: if blocking_nodes.is_empty() {
            Status::Open
        } else {
            Status::Closed
        },
        blocking_nodes,
    }
}

/// Returns `(open, opening_descendant)` for one inner node.
fn inner_open(dag: &Dag, id: usize, role: Role, conditioned: &[bool]) -> (bool, Option<usize>) {
    match role {
        Role::Mediator | Role::Confounder => (!conditioned[id], None),
        Role::Collider => {
            if conditioned[id] {
                (true, None)
            } else {
                let opener = dag.descendant_ids(id).into_iter().find(|&d| conditioned[d]);
                (opener.is_some(), opener)
            }
        }
    }
}

fn ids_of(dag: &Dag, names: &BTreeSet<&str>) -> Result<Vec<bool>> {
    let mut flags = vec![false; dag.len()];
    for name in names {
        flags[dag.require(name)?] = true;
    }
    Ok(flags)
}

/// Role of the inner node at `index`.
pub fn node_role(path: &PathTrace, index: usize) -> Result<Role> {
    let len = path.nodes.len();
    if index == 0 || index + 1 >= len || path.arrows.len() + 1 != len {
        return Err(Error::IndexOutOfRange { index, len });
    }
    Ok(Role::from_arrows(path.arrows[index - 1], path.arrows[index]))
}

/// Open/closed status of `path` when exactly `conditioned` is conditioned on.
pub fn path_status(dag: &Dag, path: &PathTrace, conditioned: &BTreeSet<&str>) -> Result<PathStatus> {
    let ids = validate_path(dag, path)?;
    let flags = ids_of(dag, conditioned)?;
    let mut inner = Vec::with_capacity(ids.len().saturating_sub(2));
    for k in 1..ids.len() - 1 {
        let role = Role::from_arrows(path.arrows[k - 1], path.arrows[k]);
        let (open, opener) = inner_open(dag, ids[k], role, &flags);
        inner.push(NodeState {
            node: path.nodes[k].clone(),
            role,
            conditioned: flags[ids[k]],
            opened_by_descendant: opener.map(|d| dag.name_of(d).to_string()),
            open,
        });
    }
    let status = if inner.iter().all(|s| s.open) {
        Status::Open
    } else {
        Status::Closed
    };
    Ok(PathStatus { status, inner })
}

/// Re-evaluates a path's status and blocking set under a new conditioning set.
pub fn restatus(dag: &Dag, path: &PathTrace, conditioned: &BTreeSet<&str>) -> Result<PathTrace> {
    let report = path_status(dag, path, conditioned)?;
    Ok(PathTrace {
        status: report.status,
        blocking_nodes: report.blocking_nodes(),
        roles: report.inner.iter().map(|s| s.role).collect(),
        ..path.clone()
    })
}

fn validate_path(dag: &Dag, path: &PathTrace) -> Result<Vec<usize>> {
    if path.nodes.len() < 2 {
        return Err(Error::InvalidPath("a path needs at least two nodes".into()));
    }
    if path.arrows.len() + 1 != path.nodes.len() {
        return Err(Error::InvalidPath(
            "arrow count must be one less than node count".into(),
        ));
    }
    let mut ids = Vec::with_capacity(path.nodes.len());
    let mut seen = BTreeSet::new();
    for name in &path.nodes {
        let id = dag
            .require(name)
            .map_err(|_| Error::InvalidPath(format!("`{name}` is not a node")))?;
        if !seen.insert(id) {
            return Err(Error::InvalidPath(format!("`{name}` repeats")));
        }
        ids.push(id);
    }
    for (k, dir) in path.arrows.iter().enumerate() {
        let (a, b) = (&path.nodes[k], &path.nodes[k + 1]);
        let present = match dir {
            Direction::Forward => dag.edge(a, b).is_some(),
            Direction::Backward => dag.edge(b, a).is_some(),
        };
        if !present {
            let shown = match dir {
                Direction::Forward => format!("{a} -> {b}"),
                Direction::Backward => format!("{a} <- {b}"),
            };
            return Err(Error::InvalidPath(format!("no edge {shown}")));
        }
    }
    Ok(ids)
}

fn effective_conditioning<'a>(dag: &'a Dag, x: &str, y: &str, given: &BTreeSet<&'a str>) -> Result<BTreeSet<&'a str>> {
    dag.require(x)?;
    dag.require(y)?;
    if x == y {
        return Err(Error::SameNode(x.to_string()));
    }
    let mut set = dag.conditioned();
    for name in given {
        dag.require(name)?;
        set.insert(name);
    }
    for endpoint in [x, y] {
        if set.contains(endpoint) {
            return Err(Error::Overlap(endpoint.to_string()));
        }
    }
    Ok(set)
}

/// Decides whether `x` and `y` are d-separated given `given` plus the nodes
/// the model marks as conditioned.
pub fn d_separated(dag: &Dag, x: &str, y: &str, given: &BTreeSet<&str>) -> Result<DsepVerdict> {
    let set = effective_conditioning(dag, x, y, given)?;
    let open_paths: Vec<PathTrace> = enumerate_paths_given(dag, x, y, &set)?
        .into_iter()
        .filter(|p| p.status.is_open())
        .collect();
    Ok(DsepVerdict {
        separated: open_paths.is_empty(),
        open_paths,
        conditioning_set: set.into_iter().map(String::from).collect(),
    })
}

/// Reachability ("Bayes-ball") form of the d-connection test. Same semantics
/// as [`d_separated`] but returns only the boolean and never enumerates paths.
pub fn reachable_connected(dag: &Dag, x: &str, y: &str, given: &BTreeSet<&str>) -> Result<bool> {
    let set = effective_conditioning(dag, x, y, given)?;
    let n = dag.len();
    let conditioned = ids_of(dag, &set)?;
    let start = dag.require(x)?;
    let goal = dag.require(y)?;

    // Nodes that are conditioned or have a conditioned descendant.
    let mut opens_collider = vec![false; n];
    let mut queue: Vec<usize> = (0..n).filter(|&i| conditioned[i]).collect();
    while let Some(i) = queue.pop() {
        if opens_collider[i] {
            continue;
        }
        opens_collider[i] = true;
        queue.extend(dag.parent_ids(i).iter().copied());
    }

    // State: (node, arrived travelling from a child i.e. "up").
    let mut visited = vec![[false; 2]; n];
    let mut frontier = VecDeque::new();
    frontier.push_back((start, true));
    while let Some((node, up)) = frontier.pop_front() {
        if visited[node][up as usize] {
            continue;
        }
        visited[node][up as usize] = true;
        if node == goal && node != start {
            return Ok(true);
        }
        let is_start = node == start;
        if up {
            if is_start || !conditioned[node] {
                frontier.extend(dag.parent_ids(node).iter().map(|&p| (p, true)));
                frontier.extend(dag.child_ids(node).iter().map(|&c| (c, false)));
            }
        } else {
            if !conditioned[node] {
                frontier.extend(dag.child_ids(node).iter().map(|&c| (c, false)));
            }
            if opens_collider[node] {
                frontier.extend(dag.parent_ids(node).iter().map(|&p| (p, true)));
            }
        }
    }
    Ok(false)
}
