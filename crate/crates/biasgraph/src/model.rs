use std::fmt::Write;

use biasgraph_core::{attach_predictor, Dag, PredictorSpec, Result};

/// A parsed model file: the graph plus the roles it declares.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub name: String,
    /// The graph as declared, without the predictor node.
    pub dag: Dag,
    pub interest: Option<String>,
    pub outcome: Option<String>,
    pub predictor: Option<PredictorSpec>,
}

impl ModelSpec {
    /// The graph with the predictor attached, if one is declared.
    pub fn analysis_dag(&self) -> Result<Dag> {
        match &self.predictor {
            Some(spec) => attach_predictor(&self.dag, spec),
            None => Ok(self.dag.clone()),
        }
    }
}

/// Canonical text form. Nodes keep declaration order, edges are sorted, and
/// role lines come last.
pub fn serialize_model(spec: &ModelSpec) -> String {
    let mut out = String::new();
    writeln!(out, "model {}", spec.name).unwrap();

    if !spec.dag.is_empty() {
        out.push('\n');
    }
    for node in spec.dag.nodes() {
        out.push_str("node ");
        out.push_str(&node.name);
        for (flag, word) in [
            (node.unobserved, "unobserved"),
            (node.conditioned, "conditioned"),
            (node.force, "force"),
        ] {
            if flag {
                out.push(' ');
                out.push_str(word);
            }
        }
        out.push('\n');
    }

    if !spec.dag.edges().is_empty() {
        out.push('\n');
    }
    for edge in spec.dag.edges() {
        write!(out, "edge {} -> {}", edge.source, edge.target).unwrap();
        if edge.unjustified {
            out.push_str(" unjustified");
        }
        out.push('\n');
    }

    let has_roles = spec.predictor.is_some() || spec.interest.is_some() || spec.outcome.is_some();
    if has_roles {
        out.push('\n');
    }
    if let Some(p) = &spec.predictor {
        let features: Vec<&str> = p.predictor_set.iter().map(String::as_str).collect();
        write!(out, "predictor {} from {}", p.name, features.join(",")).unwrap();
        if p.deterministic {
            out.push_str(" deterministic");
        }
        out.push('\n');
    }
    if let Some(x) = &spec.interest {
        writeln!(out, "interest {x}").unwrap();
    }
    if let Some(y) = &spec.outcome {
        writeln!(out, "outcome {y}").unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use biasgraph_core::{EdgeDecl, NodeDecl};

    #[test]
    fn roleless_spec_has_no_role_lines() {
        let dag = Dag::build(
            vec![NodeDecl::new("B"), NodeDecl::new("A")],
            vec![EdgeDecl::new("B", "A")],
        )
        .unwrap();
        let spec = ModelSpec {
            name: "tiny".into(),
            dag,
            interest: None,
            outcome: None,
            predictor: None,
        };
        assert_eq!(serialize_model(&spec), "model tiny\n\nnode B\nnode A\n\nedge B -> A\n");
    }

    #[test]
    fn analysis_dag_attaches_predictor() {
        let dag = Dag::build(
            vec![NodeDecl::new("Z"), NodeDecl::new("Y")],
            vec![EdgeDecl::new("Z", "Y")],
        )
        .unwrap();
        let spec = ModelSpec {
            name: "p".into(),
            dag,
            interest: None,
            outcome: Some("Y".into()),
            predictor: Some(PredictorSpec::new("Yhat", ["Z"])),
        };
        let full = spec.analysis_dag().unwrap();
        assert!(full.contains("Yhat"));
        assert!(full.predictor("Yhat").is_some());
        assert!(!spec.dag.contains("Yhat"));
    }
}
