use std::fmt::Write;

use crate::model::ModelSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DotOptions {
    /// Draw the predictor node and its feature edges.
    pub show_predictor: bool,
    /// Emit `rankdir=LR`.
    pub left_to_right: bool,
}

impl Default for DotOptions {
    fn default() -> Self {
        DotOptions {
            show_predictor: true,
            left_to_right: false,
        }
    }
}

/// Graphviz rendering. Unjustified edges are red, conditioned nodes get a
/// double outline, unobserved nodes are dashed and the predictor is a box.
/// Unannotated models produce no attributes at all.
pub fn export_dot(spec: &ModelSpec, options: &DotOptions) -> String {
    let mut out = String::new();
    writeln!(out, "digraph {} {{", spec.name).unwrap();
    if options.left_to_right {
        out.push_str("  rankdir=LR;\n");
    }
    for node in spec.dag.nodes() {
        let mut attrs = Vec::new();
        if node.unobserved {
            attrs.push("style=dashed");
        }
        if node.conditioned {
            attrs.push("peripheries=2");
        }
        line(&mut out, &node.name, &attrs);
    }
    let predictor = spec.predictor.as_ref().filter(|_| options.show_predictor);
    if let Some(p) = predictor {
        line(&mut out, &p.name, &["shape=box"]);
    }
    for edge in spec.dag.edges() {
        let attrs: &[&str] = if edge.unjustified { &["color=red"] } else { &[] };
        line(&mut out, &format!("{} -> {}", edge.source, edge.target), attrs);
    }
    if let Some(p) = predictor {
        for feature in &p.predictor_set {
            line(&mut out, &format!("{feature} -> {}", p.name), &[]);
        }
    }
    out.push_str("}\n");
    out
}

fn line(out: &mut String, body: &str, attrs: &[&str]) {
    if attrs.is_empty() {
        writeln!(out, "  {body};").unwrap();
    } else {
        writeln!(out, "  {body} [{}];", attrs.join(", ")).unwrap();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_model;

    #[test]
    fn plain_model_has_no_attributes() {
        let spec = parse_model("model plain\nnode A\nnode B\nedge A -> B\n").unwrap();
        let dot = export_dot(&spec, &DotOptions::default());
        assert_eq!(dot, "digraph plain {\n  A;\n  B;\n  A -> B;\n}\n");
        assert!(!dot.contains('['));
    }

    #[test]
    fn annotations_map_to_attributes() {
        let text = "model m\nnode U unobserved conditioned force\nnode A\nedge U -> A unjustified\n\
                    predictor P from A\n";
        let spec = parse_model(text).unwrap();
        let dot = export_dot(&spec, &DotOptions::default());
        assert!(dot.contains("  U [style=dashed, peripheries=2];\n"));
        assert!(dot.contains("  P [shape=box];\n"));
        assert!(dot.contains("  U -> A [color=red];\n"));
        assert!(dot.contains("  A -> P;\n"));
        let hidden = export_dot(
            &spec,
            &DotOptions {
                show_predictor: false,
                left_to_right: true,
            },
        );
        assert!(!hidden.contains("P"));
        assert!(hidden.contains("rankdir=LR;"));
    }
}
