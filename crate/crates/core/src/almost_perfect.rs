//! Local search for D-tilings that leave few vertices uncovered.
//!
//! Starting from a greedy maximal tiling, the search applies augmenting
//! moves that each raise the number of copies by one:
//!
//! - `grow`: the uncovered set `W` itself contains a copy;
//! - `split`: a copy holding two vertices `u`, `v` whose links into `W`
//!   contain disjoint 2-paths is replaced by `{u} ∪ P(u)` and `{v} ∪ P(v)`;
//! - `big_swap`: a copy `D₀` among covered vertices meets `j ≥ 2` copies,
//!   each of which keeps a vertex `uᵢ` with a 2-path in its link into `W`;
//!   those `j` copies give way to `D₀` and `{uᵢ} ∪ P(uᵢ)`.
//!
//! Moves are first sought among `W`-big vertices (link into `W` of at least
//! `big_factor·|W|` pairs). Since a link on `W` has at most `C(|W|, 2)`
//! pairs, no vertex is `W`-big once `|W| < 2·big_factor + 1`; a relaxed
//! tier then lets any vertex with a 2-path in its link play the big role.

use serde::{Deserialize, Serialize};

use crate::bitset::VertexSet;
use crate::error::{input, Error, Result};
use crate::exact::{quad_catalog, QuadCatalog};
use crate::hypergraph::{validate_tiling, DCopy, Hypergraph3, Tiling, Vertex};
use crate::rng::seeded;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NearPerfectConfig {
    pub gamma: f64,
    /// Maximum number of applied moves.
    pub move_budget: usize,
    /// `v` is `W`-big when `|H_v[W]| ≥ big_factor·|W|`.
    pub big_factor: usize,
    /// Stop once at most this many vertices are uncovered; `None` means
    /// `⌊50/gamma⌋`.
    pub stop_at: Option<usize>,
    /// Allow moves through vertices that are not `W`-big.
    pub relaxed: bool,
    /// Seed 0 searches in the given labels; other seeds search a random
    /// relabelling, which changes every tie-break.
    pub seed: u64,
}

impl Default for NearPerfectConfig {
    fn default() -> Self {
        NearPerfectConfig {
            gamma: 0.1,
            move_budget: 10_000,
            big_factor: 10,
            stop_at: None,
            relaxed: true,
            seed: 0,
        }
    }
}

impl NearPerfectConfig {
    pub fn stop_threshold(&self) -> usize {
        self.stop_at.unwrap_or((50.0 / self.gamma).floor() as usize)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BigSmallSplit {
    pub w: Vec<Vertex>,
    pub big: Vec<Vertex>,
    pub small: Vec<Vertex>,
    pub threshold: usize,
}

/// Splits the covered vertices by link size into the uncovered set,
/// with threshold `10·|W|`.
pub fn classify_big_small(g: &Hypergraph3, t: &Tiling) -> BigSmallSplit {
    classify_with_factor(g, t, 10)
}

pub fn classify_with_factor(g: &Hypergraph3, t: &Tiling, factor: usize) -> BigSmallSplit {
    let covered = t.covered_set(g.n());
    let w = covered.complement();
    let threshold = factor * w.len();
    let (mut big, mut small) = (Vec::new(), Vec::new());
    for v in covered.iter() {
        if g.link_size_on(v, &w) >= threshold {
            big.push(v);
        } else {
            small.push(v);
        }
    }
    BigSmallSplit {
        w: w.to_vec(),
        big,
        small,
        threshold,
    }
}

/// A 2-path `w₁ − w₂ − w₃` in a graph given by its edge list, avoiding
/// `forbidden`: the smallest admissible centre with its two smallest
/// admissible neighbours.
pub fn find_two_path(edges: &[(Vertex, Vertex)], forbidden: &VertexSet) -> Option<[Vertex; 3]> {
    let mut adj: std::collections::BTreeMap<Vertex, Vec<Vertex>> = Default::default();
    for &(a, b) in edges {
        if a == b || forbidden.contains(a) || forbidden.contains(b) {
            continue;
        }
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    adj.into_iter().find_map(|(c, mut nb)| {
        nb.sort_unstable();
        nb.dedup();
        (nb.len() >= 2).then(|| [nb[0], c, nb[1]])
    })
}

/// [`find_two_path`] on `H_v[W]` without building the link.
fn two_path(g: &Hypergraph3, v: Vertex, w: &VertexSet) -> Option<[Vertex; 3]> {
    for c in w.iter() {
        let nb = g.neighbors(v, c);
        let mut it = w.iter().filter(|&x| x != c && nb.contains(x));
        if let (Some(a), Some(b)) = (it.next(), it.next()) {
            return Some([a, c, b]);
        }
    }
    None
}

fn path_copy(u: Vertex, p: [Vertex; 3]) -> DCopy {
    DCopy::from_edges([u, p[0], p[1]], [u, p[1], p[2]]).expect("a 2-path in the link spans D")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MoveKind {
    Grow,
    Split,
    BigSwap,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentationMove {
    pub kind: MoveKind,
    /// Whether the move used vertices that are not `W`-big.
    pub relaxed: bool,
    /// Indices into the current tiling, ascending.
    pub removed: Vec<usize>,
    pub added: Vec<DCopy>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// Leftover reached the target.
    Target,
    /// No move applies.
    Stalled,
    /// Move budget used up.
    Budget,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveCounts {
    pub grow: usize,
    pub split: usize,
    pub big_swap: usize,
    pub relaxed_split: usize,
    pub relaxed_big_swap: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NearPerfectReport {
    pub n: usize,
    pub gamma: f64,
    pub stop_at: usize,
    /// The target leaves nothing to prove: it is at least `n`.
    pub vacuous: bool,
    pub initial_size: usize,
    pub moves: MoveCounts,
    /// Uncovered count after the greedy start and after each move.
    pub leftover_trajectory: Vec<usize>,
    pub leftover: usize,
    pub stop: StopReason,
}

#[derive(Clone, Debug)]
pub struct NearPerfect {
    pub tiling: Tiling,
    pub report: NearPerfectReport,
}

struct Search<'a> {
    g: &'a Hypergraph3,
    catalog: QuadCatalog,
    copies: Vec<DCopy>,
    owner: Vec<Option<usize>>,
    w: VertexSet,
}

impl<'a> Search<'a> {
    fn new(g: &'a Hypergraph3) -> Self {
        let catalog = quad_catalog(g);
        let n = g.n();
        let mut s = Search {
            g,
            catalog,
            copies: Vec::new(),
            owner: vec![None; n],
            w: VertexSet::full(n),
        };
        // canonical-first maximal tiling
        let quads: Vec<[Vertex; 4]> = s.catalog.quads().to_vec();
        for q in quads {
            if q.iter().all(|&v| s.w.contains(v)) {
                let d = g.d_copy_on(&q).expect("catalog quads span D");
                s.copies.push(d);
                s.reindex();
            }
        }
        s
    }

    fn reindex(&mut self) {
        self.owner.iter_mut().for_each(|o| *o = None);
        self.w = VertexSet::full(self.g.n());
        for (i, d) in self.copies.iter().enumerate() {
            for v in d.vertices() {
                self.owner[v] = Some(i);
                self.w.remove(v);
            }
        }
    }

    fn apply(&mut self, mv: &AugmentationMove) -> Result<()> {
        let before = self.copies.len();
        let mut removed = mv.removed.clone();
        removed.sort_unstable_by(|a, b| b.cmp(a));
        for i in removed {
            self.copies.remove(i);
        }
        self.copies.extend(mv.added.iter().copied());
        self.reindex();
        if self.copies.len() != before + 1 {
            return Err(Error::Invariant(format!(
                "{:?} move did not grow the tiling by one",
                mv.kind
            )));
        }
        let t = Tiling::new(self.copies.clone());
        let v = validate_tiling(self.g, &t, false);
        if !v.ok {
            return Err(Error::Invariant(format!(
                "{:?} move broke the tiling: {:?}",
                mv.kind, v.violations
            )));
        }
        Ok(())
    }

    fn grow(&self) -> Option<AugmentationMove> {
        self.g.first_d_copy(&self.w).map(|d| AugmentationMove {
            kind: MoveKind::Grow,
            relaxed: false,
            removed: vec![],
            added: vec![d],
        })
    }

    /// Per copy, the vertices allowed to act as big.
    fn qualifying(&self, big_factor: usize, relaxed: bool) -> Vec<Vec<Vertex>> {
        let threshold = big_factor * self.w.len();
        self.copies
            .iter()
            .map(|d| {
                d.vertices()
                    .into_iter()
                    .filter(|&v| {
                        if relaxed {
                            two_path(self.g, v, &self.w).is_some()
                        } else {
                            self.g.link_size_on(v, &self.w) >= threshold
                        }
                    })
                    .collect()
            })
            .collect()
    }

    fn split(&self, qual: &[Vec<Vertex>], relaxed: bool) -> Option<AugmentationMove> {
        for (i, us) in qual.iter().enumerate() {
            for &u in us {
                for &v in us.iter().filter(|&&v| v != u) {
                    let Some(p1) = two_path(self.g, u, &self.w) else {
                        continue;
                    };
                    let mut rest = self.w.clone();
                    p1.iter().for_each(|&x| {
                        rest.remove(x);
                    });
                    if let Some(p2) = two_path(self.g, v, &rest) {
                        return Some(AugmentationMove {
                            kind: MoveKind::Split,
                            relaxed,
                            removed: vec![i],
                            added: vec![path_copy(u, p1), path_copy(v, p2)],
                        });
                    }
                }
            }
        }
        None
    }

    /// Disjoint 2-paths for one chosen vertex per touched copy.
    fn disjoint_paths(&self, options: &[Vec<Vertex>], w: &VertexSet) -> Option<Vec<(Vertex, [Vertex; 3])>> {
        let Some((first, rest)) = options.split_first() else {
            return Some(Vec::new());
        };
        for &u in first {
            let Some(p) = two_path(self.g, u, w) else { continue };
            let mut w2 = w.clone();
            p.iter().for_each(|&x| {
                w2.remove(x);
            });
            if let Some(mut tail) = self.disjoint_paths(rest, &w2) {
                tail.insert(0, (u, p));
                return Some(tail);
            }
        }
        None
    }

    fn try_swap(&self, d0: DCopy, qual: &[Vec<Vertex>], relaxed: bool) -> Option<AugmentationMove> {
        let vs = d0.vertices();
        let mut touched: Vec<usize> = Vec::new();
        for &v in &vs {
            let i = self.owner[v]?;
            if !touched.contains(&i) {
                touched.push(i);
            }
        }
        if touched.len() < 2 {
            return None;
        }
        touched.sort_unstable();
        let options: Vec<Vec<Vertex>> = touched
            .iter()
            .map(|&i| qual[i].iter().copied().filter(|u| !vs.contains(u)).collect())
            .collect();
        if options.iter().any(Vec::is_empty) {
            return None;
        }
        let paths = self.disjoint_paths(&options, &self.w)?;
        let mut added = vec![d0];
        added.extend(paths.into_iter().map(|(u, p)| path_copy(u, p)));
        Some(AugmentationMove {
            kind: MoveKind::BigSwap,
            relaxed,
            removed: touched,
            added,
        })
    }

    fn big_swap(&self, qual: &[Vec<Vertex>], relaxed: bool) -> Option<AugmentationMove> {
        if relaxed {
            for q in self.catalog.quads() {
                if q.iter().any(|&v| self.w.contains(v)) {
                    continue;
                }
                let d0 = self.g.d_copy_on(q).expect("catalog quads span D");
                if let Some(mv) = self.try_swap(d0, qual, relaxed) {
                    return Some(mv);
                }
            }
            return None;
        }
        // copies inside the small vertices of copies that own a big vertex
        let mut sb = VertexSet::new(self.g.n());
        for (i, d) in self.copies.iter().enumerate() {
            if !qual[i].is_empty() {
                d.vertices().into_iter().filter(|v| !qual[i].contains(v)).for_each(|v| {
                    sb.insert(v);
                });
            }
        }
        self.g
            .d_copies(Some(&sb))
            .into_iter()
            .find_map(|d0| self.try_swap(d0, qual, relaxed))
    }

    fn next_move(&self, cfg: &NearPerfectConfig) -> Option<AugmentationMove> {
        if let Some(mv) = self.grow() {
            return Some(mv);
        }
        if self.w.len() < 6 {
            // every other move needs two disjoint 2-paths in W
            return None;
        }
        let strict = self.qualifying(cfg.big_factor, false);
        if let Some(mv) = self.split(&strict, false).or_else(|| self.big_swap(&strict, false)) {
            return Some(mv);
        }
        if !cfg.relaxed {
            return None;
        }
        let loose = self.qualifying(cfg.big_factor, true);
        self.split(&loose, true).or_else(|| self.big_swap(&loose, true))
    }
}

/// Greedy start plus augmenting moves, in priority `grow > split > big_swap`,
/// until the leftover is at most the stop threshold, no move applies, or
/// the move budget runs out.
pub fn near_perfect_tiling(g: &Hypergraph3, cfg: &NearPerfectConfig) -> Result<NearPerfect> {
    if cfg.gamma.is_nan() || cfg.gamma <= 0.0 {
        return input(format!("gamma must be positive, got {}", cfg.gamma));
    }
    let n = g.n();
    let perm = relabelling(n, cfg.seed);
    let h = g.relabel(&perm)?;
    let mut s = Search::new(&h);
    let stop_at = cfg.stop_threshold();
    let mut moves = MoveCounts::default();
    let initial_size = s.copies.len();
    let mut trajectory = vec![s.w.len()];
    let mut applied = 0;
    let stop = loop {
        if s.w.len() <= stop_at {
            break StopReason::Target;
        }
        if applied >= cfg.move_budget {
            break StopReason::Budget;
        }
        let Some(mv) = s.next_move(cfg) else {
            break StopReason::Stalled;
        };
        s.apply(&mv)?;
        applied += 1;
        match (mv.kind, mv.relaxed) {
            (MoveKind::Grow, _) => moves.grow += 1,
            (MoveKind::Split, false) => moves.split += 1,
            (MoveKind::Split, true) => moves.relaxed_split += 1,
            (MoveKind::BigSwap, false) => moves.big_swap += 1,
            (MoveKind::BigSwap, true) => moves.relaxed_big_swap += 1,
        }
        trajectory.push(s.w.len());
    };
    let mut inverse = vec![0; n];
    for (v, &p) in perm.iter().enumerate() {
        inverse[p] = v;
    }
    let tiling: Tiling = s.copies.iter().map(|d| d.mapped(|v| inverse[v])).collect();
    let tiling = tiling.sorted();
    let verdict = validate_tiling(g, &tiling, false);
    if !verdict.ok {
        return Err(Error::Invariant(format!(
            "local search returned a bad tiling: {:?}",
            verdict.violations
        )));
    }
    let leftover = n - 4 * tiling.len();
    Ok(NearPerfect {
        tiling,
        report: NearPerfectReport {
            n,
            gamma: cfg.gamma,
            stop_at,
            vacuous: stop_at >= n,
            initial_size,
            moves,
            leftover_trajectory: trajectory,
            leftover,
            stop,
        },
    })
}

fn relabelling(n: usize, seed: u64) -> Vec<Vertex> {
    let mut perm: Vec<Vertex> = (0..n).collect();
    if seed != 0 {
        use rand::seq::SliceRandom;
        perm.shuffle(&mut seeded(seed));
    }
    perm
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{complete_3graph, steiner_triple_system};

    fn cfg(stop_at: usize) -> NearPerfectConfig {
        NearPerfectConfig {
            stop_at: Some(stop_at),
            ..NearPerfectConfig::default()
        }
    }

    #[test]
    fn two_paths() {
        let none = VertexSet::new(10);
        assert_eq!(find_two_path(&[(0, 1), (0, 2), (0, 3)], &none), Some([1, 0, 2]));
        assert_eq!(find_two_path(&[(0, 1), (2, 3), (4, 5)], &none), None);
        let forbid = VertexSet::from_iter_in(10, [0]);
        assert_eq!(find_two_path(&[(0, 1), (1, 2), (0, 2)], &forbid), None);
    }

    #[test]
    fn two_path_matches_link_version() {
        let g = crate::constructions::random_codegree_instance(14, 4, 9).unwrap().graph;
        let w = VertexSet::from_iter_in(14, 3..14);
        for v in 0..3 {
            let link = g.link_on(v, &w).unwrap();
            assert_eq!(two_path(&g, v, &w), find_two_path(&link, &VertexSet::new(14)));
        }
    }

    #[test]
    fn classification() {
        let k20 = complete_3graph(20).unwrap();
        let t = Tiling::new(vec![
            DCopy::from_edges([0, 1, 2], [0, 1, 3]).unwrap(),
            DCopy::from_edges([4, 5, 6], [4, 5, 7]).unwrap(),
        ]);
        let split = classify_big_small(&k20, &t);
        assert_eq!((split.w.len(), split.threshold), (12, 120));
        assert!(split.big.is_empty());
        assert_eq!(split.small.len(), 8);
        assert_eq!(k20.link_size_on(0, &VertexSet::from_iter_in(20, split.w.clone())), 66);

        let full = Tiling::new(vec![DCopy::from_edges([0, 1, 2], [0, 1, 3]).unwrap()]);
        let k4 = complete_3graph(4).unwrap();
        assert_eq!(classify_big_small(&k4, &full).big, vec![0, 1, 2, 3]);
    }

    #[test]
    fn complete_and_design() {
        let r = near_perfect_tiling(&complete_3graph(16).unwrap(), &cfg(0)).unwrap();
        assert_eq!((r.report.leftover, r.report.stop), (0, StopReason::Target));
        let r = near_perfect_tiling(&steiner_triple_system(7).unwrap(), &cfg(0)).unwrap();
        assert_eq!(
            (r.tiling.len(), r.report.leftover, r.report.stop),
            (0, 7, StopReason::Stalled)
        );
        assert!(
            near_perfect_tiling(&steiner_triple_system(7).unwrap(), &NearPerfectConfig::default())
                .unwrap()
                .report
                .vacuous
        );
    }

    /// Greedy takes {0,1,2,3}, which strands 4..7; a split through 0 and 1
    /// recovers two copies.
    #[test]
    fn split_move_fires() {
        let edges = [[0, 1, 2], [0, 1, 3], [0, 4, 5], [0, 5, 6], [1, 7, 8], [1, 8, 9]];
        let g = Hypergraph3::build(10, edges).unwrap();
        let r = near_perfect_tiling(&g, &cfg(0)).unwrap();
        assert_eq!(r.tiling.len(), 2);
        assert_eq!(r.report.moves.relaxed_split, 1);
        assert_eq!(r.report.leftover_trajectory, vec![6, 2]);
    }
}
