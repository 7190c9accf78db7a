//! Shared fixtures for the criterion benches.

use dtile::constructions::{complete_3graph, planted_extremal, random_codegree_instance};
use dtile::Hypergraph3;

pub fn dense_random(n: usize, seed: u64) -> Hypergraph3 {
    random_codegree_instance(n, n.div_ceil(3), seed)
        .expect("valid parameters")
        .graph
}

pub fn planted(n: usize) -> Hypergraph3 {
    planted_extremal(n).expect("n divisible by 4")
}

pub fn complete(n: usize) -> Hypergraph3 {
    complete_3graph(n).expect("n >= 3")
}
