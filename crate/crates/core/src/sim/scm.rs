use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::graph::Dag;

pub const DEFAULT_NOISE_SD: f64 = 1.0;

/// Magnitude range of randomly drawn coefficients. The lower bound keeps
/// random models away from near-cancelling path sums.
pub const COEFFICIENT_RANGE: (f64, f64) = (0.4, 0.9);

/// Edge weights and noise scales for a linear-Gaussian model:
/// `v = sum(coef * parent) + noise_sd * N(0, 1)` in topological order.
#[derive(Debug, Clone, PartialEq)]
pub struct ScmSpec {
    pub dag: Dag,
    pub coefficients: BTreeMap<(String, String), f64>,
    pub noise_sd: BTreeMap<String, f64>,
    /// Seed the coefficients were drawn with; 0 for explicit maps.
    pub seed: u64,
}

impl ScmSpec {
    pub fn coefficient(&self, source: &str, target: &str) -> Option<f64> {
        self.coefficients
            .get(&(source.to_string(), target.to_string()))
            .copied()
    }

    pub fn noise(&self, node: &str) -> f64 {
        self.noise_sd.get(node).copied().unwrap_or(DEFAULT_NOISE_SD)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CoefficientSource {
    Explicit {
        coefficients: BTreeMap<(String, String), f64>,
        /// Overrides; unlisted nodes get [`DEFAULT_NOISE_SD`].
        noise_sd: BTreeMap<String, f64>,
    },
    /// Magnitudes uniform in [`COEFFICIENT_RANGE`], sign uniform, unit noise.
    Random { seed: u64 },
}

pub fn build_scm(dag: &Dag, source: CoefficientSource) -> Result<ScmSpec> {
    match source {
        CoefficientSource::Explicit { coefficients, noise_sd } => {
            for (source, target) in coefficients.keys() {
                if dag.edge(source, target).is_none() {
                    return Err(Error::UnknownEdge {
                        from: source.clone(),
                        to: target.clone(),
                    });
                }
            }
            for edge in dag.edges() {
                if !coefficients.contains_key(&(edge.source.clone(), edge.target.clone())) {
                    return Err(Error::MissingCoefficient {
                        from: edge.source.clone(),
                        to: edge.target.clone(),
                    });
                }
            }
            let mut noise = BTreeMap::new();
            for name in dag.names() {
                noise.insert(name.to_string(), DEFAULT_NOISE_SD);
            }
            for (node, &value) in &noise_sd {
                if !dag.contains(node) {
                    return Err(Error::UnknownNode(node.clone()));
                }
                if !(value > 0.0 && value.is_finite()) {
                    return Err(Error::NonPositiveNoise {
                        node: node.clone(),
                        value,
                    });
                }
                noise.insert(node.clone(), value);
            }
            Ok(ScmSpec {
                dag: dag.clone(),
                coefficients,
                noise_sd: noise,
                seed: 0,
            })
        }
        CoefficientSource::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (lo, hi) = COEFFICIENT_RANGE;
            let coefficients = dag
                .edges()
                .iter()
                .map(|e| {
                    let magnitude = rng.random_range(lo..=hi);
                    let value = if rng.random_bool(0.5) { magnitude } else { -magnitude };
                    ((e.source.clone(), e.target.clone()), value)
                })
                .collect();
            Ok(ScmSpec {
                dag: dag.clone(),
                coefficients,
                noise_sd: dag.names().map(|n| (n.to_string(), DEFAULT_NOISE_SD)).collect(),
                seed,
            })
        }
    }
}

/// Simulated draws, one column per node in declaration order.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleTable {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
    unobserved: BTreeSet<String>,
    seed: u64,
    selections: Vec<String>,
}

impl SampleTable {
    pub(crate) fn from_parts(
        names: Vec<String>,
        columns: Vec<Vec<f64>>,
        unobserved: BTreeSet<String>,
        seed: u64,
        selections: Vec<String>,
    ) -> Self {
        SampleTable {
            names,
            columns,
            unobserved,
            seed,
            selections,
        }
    }

    /// Number of rows.
    pub fn n(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.position(name).map(|i| self.columns[i].as_slice())
    }

    pub fn is_observed(&self, name: &str) -> bool {
        !self.unobserved.contains(name)
    }

    /// Descriptions of the row filters applied so far, oldest first.
    pub fn selections(&self) -> &[String] {
        &self.selections
    }

    pub(crate) fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub(crate) fn unobserved(&self) -> &BTreeSet<String> {
        &self.unobserved
    }

    pub(crate) fn position(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.position(name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    pub fn mean(&self, name: &str) -> Result<f64> {
        let col = &self.columns[self.column_index(name)?];
        Ok(col.iter().sum::<f64>() / col.len() as f64)
    }

    /// Unbiased sample covariance of the listed columns, in the given order.
    pub fn covariance(&self, indices: &[usize]) -> DMatrix<f64> {
        let n = self.n();
        let k = indices.len();
        let means: Vec<f64> = indices
            .iter()
            .map(|&i| self.columns[i].iter().sum::<f64>() / n as f64)
            .collect();
        let mut cov = DMatrix::zeros(k, k);
        for a in 0..k {
            let ca = &self.columns[indices[a]];
            for b in a..k {
                let cb = &self.columns[indices[b]];
                let s: f64 = ca.iter().zip(cb).map(|(u, v)| (u - means[a]) * (v - means[b])).sum();
                let value = s / (n as f64 - 1.0);
                cov[(a, b)] = value;
                cov[(b, a)] = value;
            }
        }
        cov
    }
}

/// Draws `n` rows. Identical `(scm, n, seed)` always give identical tables.
/// Unobserved nodes are sampled like any other and flagged in the table.
pub fn sample(scm: &ScmSpec, n: usize, seed: u64) -> Result<SampleTable> {
    if n == 0 {
        return Err(Error::InsufficientSamples { n, required: 1 });
    }
    let dag = &scm.dag;
    let mut inputs: Vec<Vec<(usize, f64)>> = vec![Vec::new(); dag.len()];
    for edge in dag.edges() {
        let coef = scm
            .coefficient(&edge.source, &edge.target)
            .ok_or_else(|| Error::MissingCoefficient {
                from: edge.source.clone(),
                to: edge.target.clone(),
            })?;
        inputs[dag.require(&edge.target)?].push((dag.require(&edge.source)?, coef));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); dag.len()];
    for &node in dag.topo_ids() {
        let sd = scm.noise(dag.name_of(node));
        let mut column: Vec<f64> = (0..n)
            .map(|_| {
                let noise: f64 = StandardNormal.sample(&mut rng);
                sd * noise
            })
            .collect();
        for &(parent, coef) in &inputs[node] {
            for (value, p) in column.iter_mut().zip(&columns[parent]) {
                *value += coef * p;
            }
        }
        columns[node] = column;
    }

    Ok(SampleTable::from_parts(
        dag.names().map(String::from).collect(),
        columns,
        dag.nodes()
            .iter()
            .filter(|d| d.unobserved)
            .map(|d| d.name.clone())
            .collect(),
        seed,
        Vec::new(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{EdgeDecl, NodeDecl};

    fn chain() -> Dag {
        Dag::build(
            vec![NodeDecl::new("X"), NodeDecl::new("Z"), NodeDecl::new("Y")],
            vec![EdgeDecl::new("X", "Z"), EdgeDecl::new("Z", "Y")],
        )
        .unwrap()
    }

    fn unit_chain() -> ScmSpec {
        let coefficients = BTreeMap::from([(("X".into(), "Z".into()), 1.0), (("Z".into(), "Y".into()), 1.0)]);
        build_scm(
            &chain(),
            CoefficientSource::Explicit {
                coefficients,
                noise_sd: BTreeMap::new(),
            },
        )
        .unwrap()
    }

    #[test]
    fn explicit_map_is_echoed() {
        let scm = unit_chain();
        assert_eq!(scm.coefficient("X", "Z"), Some(1.0));
        assert_eq!(scm.coefficient("Z", "Y"), Some(1.0));
        assert_eq!(scm.noise("Y"), 1.0);
    }

    #[test]
    fn missing_and_unknown_coefficients() {
        let only_first = BTreeMap::from([(("X".to_string(), "Z".to_string()), 1.0)]);
        assert_eq!(
            build_scm(
                &chain(),
                CoefficientSource::Explicit {
                    coefficients: only_first.clone(),
                    noise_sd: BTreeMap::new()
                }
            ),
            Err(Error::MissingCoefficient {
                from: "Z".into(),
                to: "Y".into()
            })
        );
        let mut extra = only_first;
        extra.insert(("Z".into(), "Y".into()), 1.0);
        extra.insert(("X".into(), "Y".into()), 1.0);
        assert!(matches!(
            build_scm(
                &chain(),
                CoefficientSource::Explicit {
                    coefficients: extra,
                    noise_sd: BTreeMap::new()
                }
            ),
            Err(Error::UnknownEdge { .. })
        ));
    }

    #[test]
    fn noise_must_be_positive() {
        let scm = unit_chain();
        let err = build_scm(
            &chain(),
            CoefficientSource::Explicit {
                coefficients: scm.coefficients.clone(),
                noise_sd: BTreeMap::from([("Z".to_string(), 0.0)]),
            },
        )
        .unwrap_err();
        assert_eq!(
            err,
            Error::NonPositiveNoise {
                node: "Z".into(),
                value: 0.0
            }
        );
    }

    #[test]
    fn random_coefficients_are_deterministic_and_bounded() {
        let a = build_scm(&chain(), CoefficientSource::Random { seed: 7 }).unwrap();
        let b = build_scm(&chain(), CoefficientSource::Random { seed: 7 }).unwrap();
        assert_eq!(a, b);
        for value in a.coefficients.values() {
            assert!((0.4..=0.9).contains(&value.abs()), "{value}");
        }
    }

    #[test]
    fn sampling_is_reproducible() {
        let scm = unit_chain();
        let a = sample(&scm, 500, 11).unwrap();
        let b = sample(&scm, 500, 11).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample(&scm, 500, 12).unwrap());
        let one = sample(&scm, 1, 3).unwrap();
        assert_eq!(one.n(), 1);
        assert!(matches!(sample(&scm, 0, 3), Err(Error::InsufficientSamples { .. })));
    }

    #[test]
    fn unobserved_nodes_are_flagged() {
        let dag = Dag::build(
            vec![NodeDecl::new("U").unobserved(), NodeDecl::new("Y")],
            vec![EdgeDecl::new("U", "Y")],
        )
        .unwrap();
        let scm = build_scm(&dag, CoefficientSource::Random { seed: 1 }).unwrap();
        let table = sample(&scm, 10, 1).unwrap();
        assert!(!table.is_observed("U"));
        assert!(table.is_observed("Y"));
        assert_eq!(table.column("U").unwrap().len(), 10);
    }
}
