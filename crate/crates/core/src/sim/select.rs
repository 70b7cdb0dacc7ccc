use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::scm::SampleTable;
use crate::error::{Error, Result};

/// Row filter on a single column.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Predicate {
    /// value > c
    Above(f64),
    /// value < c
    Below(f64),
    /// The `ceil(q * n)` largest values, `q` in (0, 1].
    Top(f64),
    /// The `ceil(q * n)` smallest values.
    Bottom(f64),
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::Above(c) => write!(f, "> {c}"),
            Predicate::Below(c) => write!(f, "< {c}"),
            Predicate::Top(q) => write!(f, "in top {q}"),
            Predicate::Bottom(q) => write!(f, "in bottom {q}"),
        }
    }
}

/// Keeps only rows satisfying `predicate` on `node`, preserving row order.
/// Selection into a dataset is conditioning by another name.
pub fn select(data: &SampleTable, node: &str, predicate: Predicate) -> Result<SampleTable> {
    let column = data
        .column(node)
        .ok_or_else(|| Error::UnknownColumn(node.to_string()))?;
    let keep: Vec<bool> = match predicate {
        Predicate::Above(c) => column.iter().map(|v| *v > c).collect(),
        Predicate::Below(c) => column.iter().map(|v| *v < c).collect(),
        Predicate::Top(q) | Predicate::Bottom(q) => {
            if !(q > 0.0 && q <= 1.0) {
                return Err(Error::FractionOutOfRange(q));
            }
            let count = libm::ceil(q * column.len() as f64) as usize;
            let mut order: Vec<usize> = (0..column.len()).collect();
            if matches!(predicate, Predicate::Top(_)) {
                order.sort_by(|&a, &b| column[b].total_cmp(&column[a]).then(a.cmp(&b)));
            } else {
                order.sort_by(|&a, &b| column[a].total_cmp(&column[b]).then(a.cmp(&b)));
            }
            let mut keep = alloc::vec![false; column.len()];
            for &row in order.iter().take(count) {
                keep[row] = true;
            }
            keep
        }
    };
    if !keep.iter().any(|k| *k) {
        return Err(Error::EmptySelection(node.to_string()));
    }

    let columns = data
        .columns()
        .iter()
        .map(|col| col.iter().zip(&keep).filter(|(_, k)| **k).map(|(v, _)| *v).collect())
        .collect();
    let mut selections: Vec<String> = data.selections().to_vec();
    selections.push(format!("{node} {predicate}"));
    Ok(SampleTable::from_parts(
        data.names().to_vec(),
        columns,
        data.unobserved().clone(),
        data.seed(),
        selections,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Dag, EdgeDecl, NodeDecl};
    use crate::sim::{build_scm, sample, CoefficientSource};
    use alloc::vec;

    fn table() -> SampleTable {
        let dag = Dag::build(
            vec![NodeDecl::new("A"), NodeDecl::new("B")],
            vec![EdgeDecl::new("A", "B")],
        )
        .unwrap();
        let scm = build_scm(&dag, CoefficientSource::Random { seed: 5 }).unwrap();
        sample(&scm, 1000, 5).unwrap()
    }

    #[test]
    fn always_true_predicate_is_identity() {
        let t = table();
        let same = select(&t, "A", Predicate::Above(f64::NEG_INFINITY)).unwrap();
        assert_eq!(same.column("A"), t.column("A"));
        assert_eq!(same.column("B"), t.column("B"));
        assert_eq!(same.selections().len(), 1);
        let all = select(&t, "A", Predicate::Top(1.0)).unwrap();
        assert_eq!(all.column("B"), t.column("B"));
    }

    #[test]
    fn thresholds_and_quantiles() {
        let t = table();
        let high = select(&t, "A", Predicate::Above(0.0)).unwrap();
        assert!(high.column("A").unwrap().iter().all(|v| *v > 0.0));
        let top = select(&t, "A", Predicate::Top(0.25)).unwrap();
        assert_eq!(top.n(), 250);
        let bottom = select(&t, "A", Predicate::Bottom(0.25)).unwrap();
        let max_bottom = bottom.column("A").unwrap().iter().cloned().fold(f64::MIN, f64::max);
        let min_top = top.column("A").unwrap().iter().cloned().fold(f64::MAX, f64::min);
        assert!(max_bottom < min_top);
    }

    #[test]
    fn selection_errors() {
        let t = table();
        assert_eq!(
            select(&t, "A", Predicate::Above(1e9)).unwrap_err(),
            Error::EmptySelection("A".into())
        );
        assert_eq!(
            select(&t, "Q", Predicate::Above(0.0)).unwrap_err(),
            Error::UnknownColumn("Q".into())
        );
        assert_eq!(
            select(&t, "A", Predicate::Top(0.0)).unwrap_err(),
            Error::FractionOutOfRange(0.0)
        );
    }
}
