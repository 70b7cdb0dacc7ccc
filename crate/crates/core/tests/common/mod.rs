//! Test-only oracles. Nothing here calls into the library's path or
//! statistics code; they work on plain index-based graphs and matrices.

#![allow(dead_code, clippy::needless_range_loop)]

use biasgraph_core::{Dag, EdgeDecl, NodeDecl};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A graph as a node count plus `(source, target)` index pairs.
#[derive(Debug, Clone)]
pub struct RawGraph {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

impl RawGraph {
    pub fn name(i: usize) -> String {
        format!("V{i}")
    }

    pub fn to_dag(&self) -> Dag {
        Dag::build(
            (0..self.n).map(|i| NodeDecl::new(Self::name(i))).collect(),
            self.edges
                .iter()
                .map(|&(a, b)| EdgeDecl::new(Self::name(a), Self::name(b)))
                .collect(),
        )
        .expect("raw graph is acyclic")
    }

    fn adjacency(&self) -> Vec<Vec<bool>> {
        let mut adj = vec![vec![false; self.n]; self.n];
        for &(a, b) in &self.edges {
            adj[a][b] = true;
        }
        adj
    }

    /// `reach[a][b]`: a directed path of length >= 1 runs from a to b.
    pub fn closure(&self) -> Vec<Vec<bool>> {
        let mut reach = self.adjacency();
        for k in 0..self.n {
            for i in 0..self.n {
                if reach[i][k] {
                    for j in 0..self.n {
                        if reach[k][j] {
                            reach[i][j] = true;
                        }
                    }
                }
            }
        }
        reach
    }
}

/// Every DAG on `n` nodes whose edges respect the order 0 < 1 < ... < n-1.
pub fn all_ordered_dags(n: usize) -> Vec<RawGraph> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    (0..1u64 << pairs.len())
        .map(|mask| RawGraph {
            n,
            edges: pairs
                .iter()
                .enumerate()
                .filter(|(k, _)| mask & (1 << k) != 0)
                .map(|(_, p)| *p)
                .collect(),
        })
        .collect()
}

/// A random DAG: a shuffled node order and independent edge draws.
pub fn random_dag(n: usize, seed: u64) -> RawGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let density = rng.random_range(0.15..0.65);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(density) {
                edges.push((order[i], order[j]));
            }
        }
    }
    RawGraph { n, edges }
}

/// Brute-force d-separation: enumerate all simple undirected paths over the
/// adjacency matrix and apply the mediator/confounder/collider rules.
pub fn oracle_separated(g: &RawGraph, x: usize, y: usize, given: &[usize]) -> bool {
    let adj = g.adjacency();
    let reach = g.closure();
    let conditioned: Vec<bool> = (0..g.n).map(|i| given.contains(&i)).collect();
    let inner_open = |prev: usize, node: usize, next: usize| {
        let collider = adj[prev][node] && adj[next][node];
        if collider {
            conditioned[node] || (0..g.n).any(|d| reach[node][d] && conditioned[d])
        } else {
            !conditioned[node]
        }
    };

    let mut stack: Vec<Vec<usize>> = vec![vec![x]];
    while let Some(path) = stack.pop() {
        let last = *path.last().unwrap();
        for next in 0..g.n {
            if path.contains(&next) || !(adj[last][next] || adj[next][last]) {
                continue;
            }
            let mut extended = path.clone();
            extended.push(next);
            if next == y {
                let open = (1..extended.len() - 1).all(|k| inner_open(extended[k - 1], extended[k], extended[k + 1]));
                if open {
                    return false;
                }
            } else {
                stack.push(extended);
            }
        }
    }
    true
}

/// All subsets of `items`.
pub fn power_set(items: &[usize]) -> Vec<Vec<usize>> {
    (0..1u32 << items.len())
        .map(|mask| {
            items
                .iter()
                .enumerate()
                .filter(|(k, _)| mask & (1 << k) != 0)
                .map(|(_, v)| *v)
                .collect()
        })
        .collect()
}

/// Population covariance of a linear-Gaussian model, built up in a
/// topological order: Cov(i, j) = sum_p b_ip Cov(p, j) for j before i.
pub fn population_covariance(order: &[usize], weights: &[Vec<f64>], noise_sd: &[f64]) -> Vec<Vec<f64>> {
    let n = order.len();
    let mut cov = vec![vec![0.0; n]; n];
    for (pos, &i) in order.iter().enumerate() {
        for &j in &order[..pos] {
            let v: f64 = (0..n).map(|p| weights[i][p] * cov[p][j]).sum();
            cov[i][j] = v;
            cov[j][i] = v;
        }
        let mut var = noise_sd[i] * noise_sd[i];
        for p in 0..n {
            for q in 0..n {
                var += weights[i][p] * weights[i][q] * cov[p][q];
            }
        }
        cov[i][i] = var;
    }
    cov
}

/// Partial correlation of `x` and `y` given `given` from a covariance matrix,
/// by Gauss-Jordan inversion of the selected block.
pub fn oracle_partial_correlation(cov: &[Vec<f64>], x: usize, y: usize, given: &[usize]) -> f64 {
    let mut idx = vec![x, y];
    idx.extend_from_slice(given);
    let k = idx.len();
    let mut m: Vec<Vec<f64>> = (0..k)
        .map(|a| {
            let mut row: Vec<f64> = (0..k).map(|b| cov[idx[a]][idx[b]]).collect();
            row.extend((0..k).map(|b| if a == b { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap();
        m.swap(col, pivot);
        let p = m[col][col];
        for v in m[col].iter_mut() {
            *v /= p;
        }
        for row in 0..k {
            if row != col {
                let f = m[row][col];
                if f != 0.0 {
                    for c in 0..2 * k {
                        m[row][c] -= f * m[col][c];
                    }
                }
            }
        }
    }
    let inv = |a: usize, b: usize| m[a][k + b];
    -inv(0, 1) / (inv(0, 0) * inv(1, 1)).sqrt()
}

/// Correlation of `x` and `y` after keeping only draws with `s > threshold`,
/// for a zero-mean Gaussian vector with covariance `cov`. Selection on `s`
/// changes only the law of `s`; everything else follows through the
/// regression on `s`.
pub fn truncated_correlation(cov: &[Vec<f64>], s: usize, threshold: f64, x: usize, y: usize) -> f64 {
    use statrs::distribution::{Continuous, ContinuousCDF, Normal};
    let std_normal = Normal::new(0.0, 1.0).unwrap();
    let var_s = cov[s][s];
    let sd = var_s.sqrt();
    let a = threshold / sd;
    let lambda = std_normal.pdf(a) / (1.0 - std_normal.cdf(a));
    let var_sel = var_s * (1.0 + a * lambda - lambda * lambda);
    let c = |i: usize, j: usize| {
        cov[i][j] - cov[i][s] * cov[j][s] / var_s + cov[i][s] * cov[j][s] * var_sel / (var_s * var_s)
    };
    c(x, y) / (c(x, x) * c(y, y)).sqrt()
}

/// Threshold that keeps the top fraction `q` of a zero-mean normal with
/// variance `var`.
pub fn top_fraction_threshold(var: f64, q: f64) -> f64 {
    use statrs::distribution::{ContinuousCDF, Normal};
    Normal::new(0.0, 1.0).unwrap().inverse_cdf(1.0 - q) * var.sqrt()
}

/// Population covariance of a simulated model, in the dag's declaration
/// order.
pub fn scm_covariance(scm: &biasgraph_core::sim::ScmSpec) -> Vec<Vec<f64>> {
    let names: Vec<&str> = scm.dag.names().collect();
    let pos = |n: &str| names.iter().position(|m| *m == n).unwrap();
    let k = names.len();
    let mut weights = vec![vec![0.0; k]; k];
    for ((s, t), c) in &scm.coefficients {
        weights[pos(t)][pos(s)] = *c;
    }
    // any order where parents come first; repeated relaxation avoids relying
    // on the library's topological sort
    let mut order: Vec<usize> = Vec::new();
    while order.len() < k {
        for i in 0..k {
            if !order.contains(&i) && (0..k).all(|p| weights[i][p] == 0.0 || order.contains(&p)) {
                order.push(i);
            }
        }
    }
    let noise: Vec<f64> = names.iter().map(|n| scm.noise(n)).collect();
    population_covariance(&order, &weights, &noise)
}
