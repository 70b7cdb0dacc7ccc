mod common;

use std::collections::BTreeSet;

use biasgraph_core::paths::{reachable_connected, restatus};
use biasgraph_core::{d_separated, enumerate_paths, Dag};
use common::{all_ordered_dags, oracle_separated, power_set, random_dag, RawGraph};
use proptest::prelude::*;

/// Checks every ordered pair and every conditioning subset of the remaining
/// nodes against the brute-force oracle. Returns the number of queries.
fn agree_everywhere(raw: &RawGraph) -> usize {
    let dag = raw.to_dag();
    let names: Vec<String> = (0..raw.n).map(RawGraph::name).collect();
    let mut queries = 0;
    for x in 0..raw.n {
        for y in 0..raw.n {
            if x == y {
                continue;
            }
            let rest: Vec<usize> = (0..raw.n).filter(|&v| v != x && v != y).collect();
            for given in power_set(&rest) {
                let set: BTreeSet<&str> = given.iter().map(|&g| names[g].as_str()).collect();
                let verdict = d_separated(&dag, &names[x], &names[y], &set).unwrap();
                let expected = oracle_separated(raw, x, y, &given);
                assert_eq!(verdict.separated, expected, "{raw:?} {x} {y} {given:?}");
                assert_eq!(verdict.separated, verdict.open_paths.is_empty());
                assert_eq!(
                    !reachable_connected(&dag, &names[x], &names[y], &set).unwrap(),
                    expected
                );
                queries += 1;
            }
        }
    }
    queries
}

#[test]
fn exhaustive_four_node_dags() {
    let graphs = all_ordered_dags(4);
    assert_eq!(graphs.len(), 64);
    let queries: usize = graphs.iter().map(agree_everywhere).sum();
    assert_eq!(queries, 64 * 12 * 4);
}

#[test]
fn random_six_node_dags() {
    for seed in 0..1000 {
        agree_everywhere(&random_dag(6, seed));
    }
}

fn names_of(dag: &Dag) -> Vec<String> {
    dag.names().map(String::from).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn swapping_endpoints_reverses_paths(seed in any::<u64>(), mask in 0u32..64) {
        let dag = random_dag(6, seed).to_dag();
        let names = names_of(&dag);
        let (x, y) = (&names[0], &names[5]);
        let given: BTreeSet<&str> = (1..5).filter(|k| mask & (1 << k) != 0).map(|k| names[k].as_str()).collect();
        let forward = d_separated(&dag, x, y, &given).unwrap();
        let backward = d_separated(&dag, y, x, &given).unwrap();
        prop_assert_eq!(forward.separated, backward.separated);
        let mut reversed: Vec<Vec<String>> = backward.open_paths.iter().map(|p| p.reversed().nodes).collect();
        reversed.sort();
        let straight: Vec<Vec<String>> = forward.open_paths.iter().map(|p| p.nodes.clone()).collect();
        prop_assert_eq!(straight, reversed);
    }

    #[test]
    fn off_path_conditioning_is_irrelevant(seed in any::<u64>(), mask in 0u32..16) {
        let dag = random_dag(6, seed).to_dag();
        let names = names_of(&dag);
        let (x, y) = (&names[0], &names[1]);
        let paths = enumerate_paths(&dag, x, y).unwrap();
        let on_some_path: BTreeSet<&str> = paths.iter().flat_map(|p| p.nodes.iter().map(String::as_str)).collect();
        let given: BTreeSet<&str> = (2..6).filter(|k| mask & (1 << (k - 2)) != 0).map(|k| names[k].as_str()).collect();
        let base = d_separated(&dag, x, y, &given).unwrap().separated;
        for node in &given {
            if on_some_path.contains(node) {
                continue;
            }
            // a node on no path can still be a conditioned descendant of a
            // collider; only nodes that are neither may be dropped
            let opens_something = paths.iter().any(|p| {
                p.nodes[1..p.nodes.len() - 1].iter().any(|inner| dag.descendants(inner).unwrap().contains(node))
            });
            if opens_something {
                continue;
            }
            let mut smaller = given.clone();
            smaller.remove(node);
            prop_assert_eq!(d_separated(&dag, x, y, &smaller).unwrap().separated, base);
        }
    }

    #[test]
    fn restatus_matches_fresh_enumeration(seed in any::<u64>(), mask in 0u32..16) {
        let dag = random_dag(6, seed).to_dag();
        let names = names_of(&dag);
        let given: BTreeSet<&str> = (2..6).filter(|k| mask & (1 << (k - 2)) != 0).map(|k| names[k].as_str()).collect();
        let open: Vec<_> = enumerate_paths(&dag, &names[0], &names[1])
            .unwrap()
            .iter()
            .map(|p| restatus(&dag, p, &given).unwrap())
            .filter(|p| p.status.is_open())
            .collect();
        prop_assert_eq!(open, d_separated(&dag, &names[0], &names[1], &given).unwrap().open_paths);
    }
}
