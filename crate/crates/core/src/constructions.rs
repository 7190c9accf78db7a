//! Instance generators: the lower-bound constructions, Steiner triple
//! systems, complete graphs, and seeded random instances.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bitset::VertexSet;
use crate::error::{input, Error, Result};
use crate::hypergraph::{Hypergraph3, Triple};
use crate::rng::seeded;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstructionKind {
    G0,
    G1,
    Complete,
    Complete3Partite,
    Sts,
    RandomCodegree,
    PlantedExtremal,
}

/// A fully specified instance request. `seed` and `target_codegree` are
/// only read by the random kind.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstructionSpec {
    pub kind: ConstructionKind,
    pub n: usize,
    pub seed: u64,
    pub target_codegree: usize,
}

impl ConstructionSpec {
    pub fn new(kind: ConstructionKind, n: usize) -> Self {
        ConstructionSpec {
            kind,
            n,
            seed: 0,
            target_codegree: 0,
        }
    }

    pub fn build(&self) -> Result<Hypergraph3> {
        let n = self.n;
        match self.kind {
            ConstructionKind::G0 => construct_g0(n),
            ConstructionKind::G1 => construct_g1(n),
            ConstructionKind::Complete => complete_3graph(n),
            ConstructionKind::Complete3Partite => {
                // near-equal parts, larger ones first
                let a = n.div_ceil(3);
                let b = (n - a).div_ceil(2);
                complete_3partite(a, b, n.saturating_sub(a + b))
            }
            ConstructionKind::Sts => steiner_triple_system(n),
            ConstructionKind::RandomCodegree => {
                random_codegree_instance(n, self.target_codegree, self.seed).map(|r| r.graph)
            }
            ConstructionKind::PlantedExtremal => planted_extremal(n),
        }
    }
}

fn all_triples(n: usize) -> impl Iterator<Item = Triple> {
    (0..n).flat_map(move |a| (a + 1..n).flat_map(move |b| (b + 1..n).map(move |c| [a, b, c])))
}

pub fn complete_3graph(n: usize) -> Result<Hypergraph3> {
    if n < 3 {
        return input(format!("complete 3-graph needs n >= 3, got {n}"));
    }
    Hypergraph3::build(n, all_triples(n))
}

/// All transversal triples of parts `0..a`, `a..a+b`, `a+b..a+b+c`.
pub fn complete_3partite(a: usize, b: usize, c: usize) -> Result<Hypergraph3> {
    if a == 0 || b == 0 || c == 0 {
        return input("every part of a complete 3-partite graph must be non-empty");
    }
    let edges = (0..a).flat_map(move |x| (a..a + b).flat_map(move |y| (a + b..a + b + c).map(move |z| [x, y, z])));
    Hypergraph3::build(a + b + c, edges)
}

/// A Steiner triple system on `0..m`: Bose's construction for
/// `m ≡ 3 (mod 6)`, Skolem's for `m ≡ 1 (mod 6)`.
pub fn steiner_triple_system(m: usize) -> Result<Hypergraph3> {
    Hypergraph3::build(m, sts_blocks(m)?)
}

pub(crate) fn sts_blocks(m: usize) -> Result<Vec<Triple>> {
    match m % 6 {
        3 if m >= 3 => Ok(bose(m / 3)),
        1 if m >= 7 => Ok(skolem(m / 6)),
        _ => Err(Error::UnsupportedOrder(m)),
    }
}

/// Bose on `Z_q × Z_3`, `q = 2t + 1` odd, point `(x, i)` labelled `x + q·i`.
/// Uses the idempotent commutative quasigroup `x∘y = (x + y)/2 mod q`.
fn bose(q: usize) -> Vec<Triple> {
    let half = q.div_ceil(2); // inverse of 2 mod q
    let p = |x: usize, i: usize| x + q * (i % 3);
    let op = |x: usize, y: usize| ((x + y) * half) % q;
    let mut blocks = Vec::new();
    for x in 0..q {
        blocks.push([p(x, 0), p(x, 1), p(x, 2)]);
    }
    for i in 0..3 {
        for x in 0..q {
            for y in x + 1..q {
                blocks.push([p(x, i), p(y, i), p(op(x, y), i + 1)]);
            }
        }
    }
    blocks
}

/// Skolem on `{∞} ∪ Z_{2s} × Z_3`, point `(x, i)` labelled `x + 2s·i`,
/// `∞` labelled `6s`. Uses the half-idempotent commutative quasigroup
/// obtained from `Z_{2s}` by renaming `2j -> j`, `2j + 1 -> s + j`.
fn skolem(s: usize) -> Vec<Triple> {
    let q = 2 * s;
    let inf = 3 * q;
    let p = |x: usize, i: usize| x + q * (i % 3);
    let op = |x: usize, y: usize| {
        let z = (x + y) % q;
        if z.is_multiple_of(2) {
            z / 2
        } else {
            s + (z - 1) / 2
        }
    };
    let mut blocks = Vec::new();
    for x in 0..s {
        blocks.push([p(x, 0), p(x, 1), p(x, 2)]);
    }
    for x in 0..s {
        for i in 0..3 {
            blocks.push([inf, p(x + s, i), p(x, i + 1)]);
        }
    }
    for i in 0..3 {
        for x in 0..q {
            for y in x + 1..q {
                blocks.push([p(x, i), p(y, i), p(op(x, y), i + 1)]);
            }
        }
    }
    blocks
}

fn require_div4(n: usize, what: &str) -> Result<usize> {
    if n == 0 || !n.is_multiple_of(4) {
        return input(format!("{what} needs n divisible by 4, got {n}"));
    }
    Ok(n / 4)
}

/// All triples meeting `0..a_size` on `0..n`.
fn triples_meeting_prefix(n: usize, a_size: usize) -> impl Iterator<Item = Triple> {
    all_triples(n).filter(move |t| t[0] < a_size)
}

/// The part sizes `(|A|, |B|)` of `G₀`/`G₁` for order `n`.
pub fn lower_bound_parts(n: usize) -> Result<(usize, usize)> {
    let k = require_div4(n, "the lower-bound construction")?;
    Ok((k - 1, 3 * k + 1))
}

/// Smallest minimum codegree that forces a perfect D-tiling for large `n`:
/// `n/4` when `n/4` is odd, `n/4 + 1` when it is even. `G₀` and `G₁` sit
/// exactly one below it.
pub fn codegree_threshold(n: usize) -> Result<usize> {
    let k = require_div4(n, "the codegree threshold")?;
    Ok(if k.is_multiple_of(2) { k + 1 } else { k })
}

/// `G₀`: `A = 0..n/4-1`, `B` the rest; every triple meeting `A`.
pub fn construct_g0(n: usize) -> Result<Hypergraph3> {
    let (a, _) = lower_bound_parts(n)?;
    Hypergraph3::build(n, triples_meeting_prefix(n, a))
}

/// `G₁`: `G₀` plus a Steiner triple system on `B`. Needs `n/4` even.
pub fn construct_g1(n: usize) -> Result<Hypergraph3> {
    let (a, b) = lower_bound_parts(n)?;
    if !(n / 4).is_multiple_of(2) {
        return input(format!("G1 needs n/4 even, got n/4 = {}", n / 4));
    }
    let sts = sts_blocks(b)?.into_iter().map(|t| [t[0] + a, t[1] + a, t[2] + a]);
    Hypergraph3::build(n, triples_meeting_prefix(n, a).chain(sts))
}

/// Tileable sibling of `G₀`: `|A| = n/4`, every triple meeting `A`.
pub fn planted_extremal(n: usize) -> Result<Hypergraph3> {
    let k = require_div4(n, "planted_extremal")?;
    Hypergraph3::build(n, triples_meeting_prefix(n, k))
}

#[derive(Clone, Debug)]
pub struct RandomInstance {
    pub graph: Hypergraph3,
    /// Independent edge probability used for the initial sample.
    pub p: f64,
    /// Edges added afterwards to lift deficient pairs to the target.
    pub repairs: usize,
}

/// Samples every triple with probability `p ≈ (d + 2√d + 1)/(n − 2)`, then
/// scans pairs lexicographically and adds random third vertices until every
/// pair has codegree at least `d`.
pub fn random_codegree_instance(n: usize, d: usize, seed: u64) -> Result<RandomInstance> {
    if d > 0 && (n < 3 || d > n - 2) {
        return input(format!("target codegree {d} impossible on {n} vertices"));
    }
    let mut rng = seeded(seed);
    let p = if d == 0 {
        0.0
    } else {
        let df = d as f64;
        ((df + 2.0 * df.sqrt() + 1.0) / (n - 2) as f64).min(1.0)
    };

    let mut nb = vec![VertexSet::new(n); n * n];
    let mut edges = Vec::new();
    let add = |nb: &mut Vec<VertexSet>, e: Triple, edges: &mut Vec<Triple>| {
        let [a, b, c] = e;
        nb[a * n + b].insert(c);
        nb[b * n + a].insert(c);
        nb[a * n + c].insert(b);
        nb[c * n + a].insert(b);
        nb[b * n + c].insert(a);
        nb[c * n + b].insert(a);
        edges.push(e);
    };
    if p > 0.0 {
        for t in all_triples(n) {
            if rng.random_bool(p) {
                add(&mut nb, t, &mut edges);
            }
        }
    }
    let mut repairs = 0;
    for u in 0..n {
        for v in u + 1..n {
            while nb[u * n + v].len() < d {
                let free: Vec<usize> = (0..n)
                    .filter(|&w| w != u && w != v && !nb[u * n + v].contains(w))
                    .collect();
                let w = free[rng.random_range(0..free.len())];
                let mut e = [u, v, w];
                e.sort_unstable();
                add(&mut nb, e, &mut edges);
                repairs += 1;
            }
        }
    }
    Ok(RandomInstance {
        graph: Hypergraph3::build(n, edges)?,
        p,
        repairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair_coverage_exact_once(g: &Hypergraph3) -> bool {
        let n = g.n();
        let mut count = vec![0usize; n * n];
        for &[a, b, c] in g.edges() {
            count[a * n + b] += 1;
            count[a * n + c] += 1;
            count[b * n + c] += 1;
        }
        (0..n).all(|u| (u + 1..n).all(|v| count[u * n + v] == 1))
    }

    #[test]
    fn fano_and_order_nine() {
        let g = steiner_triple_system(7).unwrap();
        assert_eq!(g.edge_count(), 7);
        assert!(pair_coverage_exact_once(&g));
        assert_eq!((g.min_codegree(), g.max_codegree()), (1, 1));
        let g = steiner_triple_system(9).unwrap();
        assert_eq!(g.edge_count(), 12);
        assert!(pair_coverage_exact_once(&g));
    }

    #[test]
    fn sts_rejects_bad_orders() {
        for m in [0, 1, 2, 4, 5, 6, 8, 11, 12] {
            assert_eq!(steiner_triple_system(m).unwrap_err(), Error::UnsupportedOrder(m));
        }
        assert_eq!(steiner_triple_system(3).unwrap().edge_count(), 1);
    }

    #[test]
    fn lower_bound_graphs() {
        let g0 = construct_g0(8).unwrap();
        assert_eq!(g0.min_codegree(), 1);
        let b = VertexSet::from_iter_in(8, 1..8);
        assert!(g0.edges().iter().all(|e| !b.contains(e[0])));
        assert_eq!(construct_g1(8).unwrap().min_codegree(), 2);
        assert!(construct_g1(12).is_err());
        assert!(construct_g0(10).is_err());
    }

    #[test]
    fn planted_instance() {
        let g = planted_extremal(8).unwrap();
        assert_eq!(g.min_codegree(), 2);
        assert!(g.is_d_free(&VertexSet::from_iter_in(8, 2..8)));
        assert!(planted_extremal(6).is_err());
    }

    #[test]
    fn complete_graph_sizes() {
        assert_eq!(complete_3graph(6).unwrap().edge_count(), 20);
        assert_eq!(complete_3partite(3, 3, 3).unwrap().edge_count(), 27);
        assert_eq!(complete_3partite(1, 1, 1).unwrap().edge_count(), 1);
        assert!(complete_3partite(0, 1, 1).is_err());
    }

    #[test]
    fn random_instances() {
        let r = random_codegree_instance(40, 10, 1).unwrap();
        assert!(r.graph.min_codegree() >= 10);
        let again = random_codegree_instance(40, 10, 1).unwrap();
        assert_eq!(r.graph, again.graph);
        assert_eq!(r.repairs, again.repairs);
        let zero = random_codegree_instance(12, 0, 5).unwrap();
        assert_eq!(zero.repairs, 0);
        assert_eq!(zero.graph.edge_count(), 0);
        assert!(random_codegree_instance(5, 4, 0).is_err());
    }
}
