//! Immutable annotated DAG and kinship queries.
//!
//! Nodes are identified by name everywhere outside this module; the dense
//! indices used internally never leak through the public surface.

use alloc::collections::{BTreeMap, BTreeSet, BinaryHeap};
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

use crate::error::{Error, Result};
use crate::fairness::PredictorSpec;

/// A declared variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NodeDecl {
    pub name: String,
    pub unobserved: bool,
    pub conditioned: bool,
    /// Permits a node to be both unobserved and conditioned.
    pub force: bool,
}

impl NodeDecl {
    pub fn new(name: impl Into<String>) -> Self {
        NodeDecl {
            name: name.into(),
            unobserved: false,
            conditioned: false,
            force: false,
        }
    }

    pub fn unobserved(mut self) -> Self {
        self.unobserved = true;
        self
    }

    pub fn conditioned(mut self) -> Self {
        self.conditioned = true;
        self
    }

    pub fn forced(mut self) -> Self {
        self.force = true;
        self
    }
}

/// A direct causal effect `source -> target`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EdgeDecl {
    pub source: String,
    pub target: String,
    /// Marks the effect as a bias.
    pub unjustified: bool,
}

impl EdgeDecl {
    pub fn new(source: impl Into<String>, target: impl Into<String>) -> Self {
        EdgeDecl {
            source: source.into(),
            target: target.into(),
            unjustified: false,
        }
    }

    pub fn biased(source: impl Into<String>, target: impl Into<String>) -> Self {
        EdgeDecl {
            unjustified: true,
            ..EdgeDecl::new(source, target)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Relation {
    Parents,
    Children,
    Ancestors,
    Descendants,
}

/// A validated directed acyclic graph.
///
/// Nodes keep declaration order. Edges are stored sorted by
/// `(source, target)` name so that two graphs with the same content compare
/// equal regardless of the order edges were declared in.
#[derive(Debug, Clone)]
pub struct Dag {
    nodes: Vec<NodeDecl>,
    edges: Vec<EdgeDecl>,
    index: BTreeMap<String, usize>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    topo: Vec<usize>,
    predictors: Vec<PredictorSpec>,
}

impl PartialEq for Dag {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.edges == other.edges && self.predictors == other.predictors
    }
}

impl Dag {
    /// Validates and freezes a graph.
    pub fn build(nodes: Vec<NodeDecl>, edges: Vec<EdgeDecl>) -> Result<Dag> {
        Self::build_with_predictors(nodes, edges, Vec::new())
    }

    pub(crate) fn build_with_predictors(
        nodes: Vec<NodeDecl>,
        mut edges: Vec<EdgeDecl>,
        predictors: Vec<PredictorSpec>,
    ) -> Result<Dag> {
        let mut index = BTreeMap::new();
        for (i, node) in nodes.iter().enumerate() {
            if node.name.is_empty() {
                return Err(Error::EmptyName);
            }
            if index.insert(node.name.clone(), i).is_some() {
                return Err(Error::DuplicateNode(node.name.clone()));
            }
            if node.unobserved && node.conditioned && !node.force {
                return Err(Error::ConditionedUnobserved(node.name.clone()));
            }
        }

        let mut parents = vec![Vec::new(); nodes.len()];
        let mut children = vec![Vec::new(); nodes.len()];
        let mut seen = BTreeSet::new();
        for edge in &edges {
            if edge.source == edge.target {
                return Err(Error::SelfLoop(edge.source.clone()));
            }
            let lookup = |name: &String| {
                index.get(name).copied().ok_or_else(|| Error::DanglingEdge {
                    from: edge.source.clone(),
                    to: edge.target.clone(),
                    missing: name.clone(),
                })
            };
            let s = lookup(&edge.source)?;
            let t = lookup(&edge.target)?;
            if !seen.insert((s, t)) {
                return Err(Error::DuplicateEdge {
                    from: edge.source.clone(),
                    to: edge.target.clone(),
                });
            }
            children[s].push(t);
            parents[t].push(s);
        }
        for list in parents.iter_mut().chain(children.iter_mut()) {
            list.sort_unstable();
        }
        edges.sort();

        let topo = topological_order(&parents, &children)
            .map_err(|cycle| Error::Cycle(cycle.into_iter().map(|i| nodes[i].name.clone()).collect()))?;

        Ok(Dag {
            nodes,
            edges,
            index,
            parents,
            children,
            topo,
            predictors,
        })
    }

    pub fn nodes(&self) -> &[NodeDecl] {
        &self.nodes
    }

    /// Edges sorted by `(source, target)`.
    pub fn edges(&self) -> &[EdgeDecl] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn node(&self, name: &str) -> Option<&NodeDecl> {
        self.index.get(name).map(|&i| &self.nodes[i])
    }

    pub fn edge(&self, source: &str, target: &str) -> Option<&EdgeDecl> {
        self.edges
            .binary_search_by(|e| (e.source.as_str(), e.target.as_str()).cmp(&(source, target)))
            .ok()
            .map(|i| &self.edges[i])
    }

    /// Node names in declaration order.
    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.nodes.iter().map(|n| n.name.as_str())
    }

    /// Node names in a topological order (ties broken by declaration order).
    pub fn topological_names(&self) -> impl Iterator<Item = &str> {
        self.topo.iter().map(|&i| self.nodes[i].name.as_str())
    }

    /// Nodes flagged as conditioned in the model itself.
    pub fn conditioned(&self) -> BTreeSet<&str> {
        self.nodes
            .iter()
            .filter(|n| n.conditioned)
            .map(|n| n.name.as_str())
            .collect()
    }

    pub fn predictors(&self) -> &[PredictorSpec] {
        &self.predictors
    }

    pub fn predictor(&self, name: &str) -> Option<&PredictorSpec> {
        self.predictors.iter().find(|p| p.name == name)
    }

    pub fn kinship(&self, name: &str, relation: Relation) -> Result<BTreeSet<&str>> {
        let i = self.require(name)?;
        let found: Vec<usize> = match relation {
            Relation::Parents => self.parents[i].clone(),
            Relation::Children => self.children[i].clone(),
            Relation::Ancestors => self.reach(i, &self.parents),
            Relation::Descendants => self.reach(i, &self.children),
        };
        Ok(found.into_iter().map(|j| self.nodes[j].name.as_str()).collect())
    }

    pub fn parents(&self, name: &str) -> Result<BTreeSet<&str>> {
        self.kinship(name, Relation::Parents)
    }

    pub fn children(&self, name: &str) -> Result<BTreeSet<&str>> {
        self.kinship(name, Relation::Children)
    }

    pub fn ancestors(&self, name: &str) -> Result<BTreeSet<&str>> {
        self.kinship(name, Relation::Ancestors)
    }

    pub fn descendants(&self, name: &str) -> Result<BTreeSet<&str>> {
        self.kinship(name, Relation::Descendants)
    }

    /// Undirected neighbours of a node, by name.
    pub fn neighbours(&self, name: &str) -> Result<BTreeSet<&str>> {
        let i = self.require(name)?;
        Ok(self.parents[i]
            .iter()
            .chain(&self.children[i])
            .map(|&j| self.nodes[j].name.as_str())
            .collect())
    }

    /// A new graph with every unjustified flag cleared.
    pub fn without_biases(&self) -> Dag {
        let mut out = self.clone();
        for edge in &mut out.edges {
            edge.unjustified = false;
        }
        out
    }

    pub(crate) fn require(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownNode(name.to_string()))
    }

    pub(crate) fn name_of(&self, i: usize) -> &str {
        &self.nodes[i].name
    }

    pub(crate) fn parent_ids(&self, i: usize) -> &[usize] {
        &self.parents[i]
    }

    pub(crate) fn child_ids(&self, i: usize) -> &[usize] {
        &self.children[i]
    }

    pub(crate) fn topo_ids(&self) -> &[usize] {
        &self.topo
    }

    /// Strict reachability along `adjacency`, excluding the start node.
    pub(crate) fn reach(&self, start: usize, adjacency: &[Vec<usize>]) -> Vec<usize> {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack: Vec<usize> = adjacency[start].clone();
        let mut out = Vec::new();
        while let Some(j) = stack.pop() {
            if seen[j] {
                continue;
            }
            seen[j] = true;
            out.push(j);
            stack.extend(adjacency[j].iter().copied().filter(|&k| !seen[k]));
        }
        out.sort_unstable();
        out
    }

    pub(crate) fn descendant_ids(&self, i: usize) -> Vec<usize> {
        self.reach(i, &self.children)
    }
}

/// Kahn's algorithm with a min-heap so ties resolve by declaration index.
/// On failure returns one directed cycle in edge order.
fn topological_order(parents: &[Vec<usize>], children: &[Vec<usize>]) -> core::result::Result<Vec<usize>, Vec<usize>> {
    let n = parents.len();
    let mut indegree: Vec<usize> = parents.iter().map(Vec::len).collect();
    let mut ready: BinaryHeap<Reverse<usize>> = (0..n).filter(|&i| indegree[i] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(i)) = ready.pop() {
        order.push(i);
        for &c in &children[i] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.push(Reverse(c));
            }
        }
    }
    if order.len() == n {
        return Ok(order);
    }

    // Every leftover node keeps a leftover parent, so walking parents must revisit a node.
    let leftover: Vec<bool> = indegree.iter().map(|&d| d > 0).collect();
    let mut walk = Vec::new();
    let mut position = vec![usize::MAX; n];
    let mut current = (0..n).find(|&i| leftover[i]).expect("leftover node");
    while position[current] == usize::MAX {
        position[current] = walk.len();
        walk.push(current);
        current = *parents[current]
            .iter()
            .find(|&&p| leftover[p])
            .expect("leftover parent");
    }
    let mut cycle: Vec<usize> = walk[position[current]..].to_vec();
    cycle.reverse();
    let start = cycle
        .iter()
        .enumerate()
        .min_by_key(|(_, &id)| id)
        .map(|(k, _)| k)
        .unwrap_or(0);
    cycle.rotate_left(start);
    Err(cycle)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn definitions() -> Dag {
        Dag::build(
            vec![
                NodeDecl::new("Gender"),
                NodeDecl::new("Productivity"),
                NodeDecl::new("Impact"),
                NodeDecl::new("FacultyPosition"),
            ],
            vec![
                EdgeDecl::biased("Gender", "Productivity"),
                EdgeDecl::new("Productivity", "FacultyPosition"),
                EdgeDecl::new("Impact", "FacultyPosition"),
            ],
        )
        .unwrap()
    }

    fn names(list: &[&str]) -> Vec<NodeDecl> {
        list.iter().map(|n| NodeDecl::new(*n)).collect()
    }

    #[test]
    fn builds_definitions_graph() {
        let dag = definitions();
        assert_eq!(dag.len(), 4);
        assert_eq!(dag.edges().len(), 3);
        assert!(dag.edge("Gender", "Productivity").unwrap().unjustified);
        assert_eq!(
            dag.names().collect::<Vec<_>>(),
            ["Gender", "Productivity", "Impact", "FacultyPosition"]
        );
    }

    #[test]
    fn empty_graph() {
        let dag = Dag::build(vec![], vec![]).unwrap();
        assert!(dag.is_empty());
        assert!(dag.edges().is_empty());
    }

    #[test]
    fn two_cycle_is_named() {
        let err = Dag::build(
            names(&["X", "Y"]),
            vec![EdgeDecl::new("X", "Y"), EdgeDecl::new("Y", "X")],
        )
        .unwrap_err();
        assert_eq!(err, Error::Cycle(vec!["X".into(), "Y".into()]));
    }

    #[test]
    fn longer_cycle_follows_edges() {
        let err = Dag::build(
            names(&["R", "A", "B", "C"]),
            vec![
                EdgeDecl::new("R", "A"),
                EdgeDecl::new("A", "B"),
                EdgeDecl::new("B", "C"),
                EdgeDecl::new("C", "A"),
            ],
        )
        .unwrap_err();
        assert_eq!(err, Error::Cycle(vec!["A".into(), "B".into(), "C".into()]));
    }

    #[test]
    fn structural_errors() {
        assert_eq!(
            Dag::build(names(&["A", "A"]), vec![]).unwrap_err(),
            Error::DuplicateNode("A".into())
        );
        assert_eq!(
            Dag::build(names(&["A"]), vec![EdgeDecl::new("A", "B")]).unwrap_err(),
            Error::DanglingEdge {
                from: "A".into(),
                to: "B".into(),
                missing: "B".into()
            }
        );
        assert_eq!(
            Dag::build(names(&["A"]), vec![EdgeDecl::new("A", "A")]).unwrap_err(),
            Error::SelfLoop("A".into())
        );
        assert!(matches!(
            Dag::build(
                names(&["A", "B"]),
                vec![EdgeDecl::new("A", "B"), EdgeDecl::biased("A", "B")]
            ),
            Err(Error::DuplicateEdge { .. })
        ));
        assert_eq!(Dag::build(names(&[""]), vec![]).unwrap_err(), Error::EmptyName);
    }

    #[test]
    fn conditioned_unobserved_needs_force() {
        let node = NodeDecl::new("U").unobserved().conditioned();
        assert_eq!(
            Dag::build(vec![node.clone()], vec![]).unwrap_err(),
            Error::ConditionedUnobserved("U".into())
        );
        assert!(Dag::build(vec![node.forced()], vec![]).is_ok());
    }

    #[test]
    fn kinship_on_definitions() {
        let dag = definitions();
        assert_eq!(
            dag.descendants("Gender").unwrap(),
            BTreeSet::from(["Productivity", "FacultyPosition"])
        );
        assert!(dag.ancestors("Gender").unwrap().is_empty());
        assert_eq!(
            dag.parents("FacultyPosition").unwrap(),
            BTreeSet::from(["Productivity", "Impact"])
        );
        assert_eq!(
            dag.kinship("Nope", Relation::Children),
            Err(Error::UnknownNode("Nope".into()))
        );
    }

    #[test]
    fn ancestors_in_collider_conundrum() {
        let dag = Dag::build(
            names(&["X", "Z", "Y", "Q", "W", "U"]),
            vec![
                EdgeDecl::new("X", "Z"),
                EdgeDecl::new("Z", "Y"),
                EdgeDecl::new("Q", "X"),
                EdgeDecl::new("Q", "W"),
                EdgeDecl::new("W", "Z"),
                EdgeDecl::new("U", "W"),
                EdgeDecl::new("U", "Y"),
            ],
        )
        .unwrap();
        assert_eq!(dag.ancestors("Y").unwrap(), BTreeSet::from(["Z", "X", "Q", "W", "U"]));
    }

    #[test]
    fn edge_order_does_not_affect_equality() {
        let a = Dag::build(
            names(&["A", "B", "C"]),
            vec![EdgeDecl::new("B", "C"), EdgeDecl::new("A", "B")],
        )
        .unwrap();
        let b = Dag::build(
            names(&["A", "B", "C"]),
            vec![EdgeDecl::new("A", "B"), EdgeDecl::new("B", "C")],
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn topological_order_respects_edges() {
        let dag = definitions();
        let order: Vec<&str> = dag.topological_names().collect();
        assert_eq!(order, ["Gender", "Productivity", "Impact", "FacultyPosition"]);
    }
}
