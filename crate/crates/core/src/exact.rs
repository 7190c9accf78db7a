//! Exact search engines.
//!
//! - perfect and maximum D-tilings by exact cover over the quad catalog;
//! - maximum D-free vertex sets by branch and bound;
//! - perfect matchings in 4-partite 4-graphs by backtracking.
//!
//! Every engine runs under a [`SearchBudget`]. Infeasibility is reported
//! only after the whole tree has been exhausted; hitting the budget is a
//! separate outcome.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::bitset::VertexSet;
use crate::error::{input, Error, Result};
use crate::hypergraph::{validate_tiling, DCopy, Hypergraph3, Tiling, Vertex};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OnExhaust {
    Fail,
    ReturnBest,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub node_limit: u64,
    pub time_limit: Duration,
    pub on_exhaust: OnExhaust,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            node_limit: 10_000_000,
            time_limit: Duration::from_secs(60),
            on_exhaust: OnExhaust::ReturnBest,
        }
    }
}

impl SearchBudget {
    pub fn nodes(node_limit: u64) -> Self {
        SearchBudget {
            node_limit,
            ..Self::default()
        }
    }

    fn check(&self) -> Result<()> {
        if self.node_limit == 0 || self.time_limit.is_zero() {
            return input("search budget limits must be positive");
        }
        Ok(())
    }
}

struct Meter {
    nodes: u64,
    limit: u64,
    deadline: Instant,
    exhausted: bool,
}

impl Meter {
    fn new(budget: &SearchBudget) -> Self {
        Meter {
            nodes: 0,
            limit: budget.node_limit,
            deadline: Instant::now() + budget.time_limit,
            exhausted: false,
        }
    }

    /// Counts a node; true once the budget is spent.
    #[inline]
    fn tick(&mut self) -> bool {
        if self.exhausted {
            return true;
        }
        self.nodes += 1;
        if self.nodes > self.limit || (self.nodes.is_multiple_of(1024) && Instant::now() > self.deadline) {
            self.exhausted = true;
        }
        self.exhausted
    }
}

/// The 4-sets that span a copy of D, i.e. induce at least two edges.
#[derive(Clone, Debug)]
pub struct QuadCatalog {
    quads: Vec<[Vertex; 4]>,
    incidence: Vec<Vec<usize>>,
}

impl QuadCatalog {
    /// Quads in lexicographic order.
    pub fn quads(&self) -> &[[Vertex; 4]] {
        &self.quads
    }

    /// Indices of the quads containing `v`, ascending.
    pub fn incident(&self, v: Vertex) -> &[usize] {
        &self.incidence[v]
    }

    pub fn len(&self) -> usize {
        self.quads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quads.is_empty()
    }

    pub fn contains(&self, q: &[Vertex; 4]) -> bool {
        let mut s = *q;
        s.sort_unstable();
        self.quads.binary_search(&s).is_ok()
    }
}

/// Collects every quad by walking edge pairs that share two vertices.
pub fn quad_catalog(g: &Hypergraph3) -> QuadCatalog {
    let n = g.n();
    let mut quads = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let nb = g.neighbors(u, v).to_vec();
            for (i, &w) in nb.iter().enumerate() {
                for &x in &nb[i + 1..] {
                    let mut q = [u, v, w, x];
                    q.sort_unstable();
                    quads.push(q);
                }
            }
        }
    }
    quads.sort_unstable();
    quads.dedup();
    let mut incidence = vec![Vec::new(); n];
    for (i, q) in quads.iter().enumerate() {
        for &v in q {
            incidence[v].push(i);
        }
    }
    QuadCatalog { quads, incidence }
}

fn quad_available(q: &[Vertex; 4], free: &VertexSet) -> bool {
    q.iter().all(|&v| free.contains(v))
}

/// A large D-free set found greedily; every spanning quad has a vertex
/// outside it, so `|V \ Z|` bounds the size of any D-tiling.
pub fn greedy_d_free(g: &Hypergraph3, order: &[Vertex]) -> VertexSet {
    let mut z = VertexSet::new(g.n());
    for &v in order {
        if !g.creates_d_copy(&z, v) {
            z.insert(v);
        }
    }
    z
}

/// Best of a few greedy orders: low vertex degree first, then plain id order.
pub fn bounding_d_free(g: &Hypergraph3) -> VertexSet {
    let deg = g.vertex_degrees();
    let mut by_degree: Vec<Vertex> = (0..g.n()).collect();
    by_degree.sort_by_key(|&v| (deg[v], v));
    let ascending: Vec<Vertex> = (0..g.n()).collect();
    let a = greedy_d_free(g, &by_degree);
    let b = greedy_d_free(g, &ascending);
    if b.len() > a.len() {
        b
    } else {
        a
    }
}

fn copy_of(g: &Hypergraph3, q: &[Vertex; 4]) -> DCopy {
    g.d_copy_on(q).expect("catalog quads span D")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PerfectOutcome {
    Tiled(Tiling),
    /// The whole search tree was exhausted without a tiling.
    Infeasible,
    /// The budget ran out first.
    Exhausted,
}

#[derive(Clone, Debug)]
pub struct PerfectSearch {
    pub outcome: PerfectOutcome,
    pub nodes: u64,
}

/// Exact cover over the quad catalog: branch on the uncovered vertex with
/// the fewest available quads (ties to the smaller id), prune on any
/// uncovered vertex with none, and on the D-free counting bound.
pub fn perfect_tiling_exact(g: &Hypergraph3, budget: &SearchBudget) -> Result<PerfectSearch> {
    budget.check()?;
    let n = g.n();
    if !n.is_multiple_of(4) {
        return input(format!("a perfect D-tiling needs n divisible by 4, got {n}"));
    }
    let catalog = quad_catalog(g);
    let bound_set = bounding_d_free(g);
    let mut search = CoverSearch {
        catalog: &catalog,
        bound_set: &bound_set,
        meter: Meter::new(budget),
        chosen: Vec::new(),
    };
    let mut free = VertexSet::full(n);
    let found = search.run(&mut free, n);
    let nodes = search.meter.nodes;
    let outcome = if found {
        let tiling: Tiling = search.chosen.iter().map(|&i| copy_of(g, &catalog.quads[i])).collect();
        let verdict = validate_tiling(g, &tiling, true);
        if !verdict.ok {
            return Err(Error::Invariant(format!(
                "exact cover produced a bad tiling: {:?}",
                verdict.violations
            )));
        }
        PerfectOutcome::Tiled(tiling.sorted())
    } else if search.meter.exhausted {
        PerfectOutcome::Exhausted
    } else {
        PerfectOutcome::Infeasible
    };
    Ok(PerfectSearch { outcome, nodes })
}

struct CoverSearch<'a> {
    catalog: &'a QuadCatalog,
    bound_set: &'a VertexSet,
    meter: Meter,
    chosen: Vec<usize>,
}

impl CoverSearch<'_> {
    fn run(&mut self, free: &mut VertexSet, remaining: usize) -> bool {
        if remaining == 0 {
            return true;
        }
        if self.meter.tick() {
            return false;
        }
        let outside = free.len() - free.intersection_len(self.bound_set);
        if outside < remaining / 4 {
            return false;
        }
        let mut best: Option<(usize, Vertex)> = None;
        for v in free.iter() {
            let count = self
                .catalog
                .incident(v)
                .iter()
                .filter(|&&i| quad_available(&self.catalog.quads[i], free))
                .count();
            if count == 0 {
                return false;
            }
            if best.is_none_or(|(c, _)| count < c) {
                best = Some((count, v));
            }
        }
        let (_, v) = best.expect("remaining > 0 means some vertex is free");
        for &qi in self.catalog.incident(v) {
            let q = self.catalog.quads[qi];
            if !quad_available(&q, free) {
                continue;
            }
            for &x in &q {
                free.remove(x);
            }
            self.chosen.push(qi);
            if self.run(free, remaining - 4) {
                return true;
            }
            self.chosen.pop();
            for &x in &q {
                free.insert(x);
            }
            if self.meter.exhausted {
                return false;
            }
        }
        false
    }
}

/// A search result with an optimality flag.
#[derive(Clone, Debug)]
pub struct Bounded<T> {
    pub value: T,
    /// False when the budget ran out before the bound was proven.
    pub optimal: bool,
    pub nodes: u64,
}

fn finish<T>(value: T, meter: &Meter, budget: &SearchBudget) -> Result<Bounded<T>> {
    if meter.exhausted && budget.on_exhaust == OnExhaust::Fail {
        return Err(Error::BudgetExhausted { nodes: meter.nodes });
    }
    Ok(Bounded {
        value,
        optimal: !meter.exhausted,
        nodes: meter.nodes,
    })
}

/// Branch and bound for a maximum D-tiling.
pub fn max_tiling_exact(g: &Hypergraph3, budget: &SearchBudget) -> Result<Bounded<Tiling>> {
    budget.check()?;
    let n = g.n();
    let catalog = quad_catalog(g);
    let bound_set = bounding_d_free(g);

    // greedy incumbent
    let mut free = VertexSet::full(n);
    let mut incumbent = Vec::new();
    for (i, q) in catalog.quads.iter().enumerate() {
        if quad_available(q, &free) {
            q.iter().for_each(|&v| {
                free.remove(v);
            });
            incumbent.push(i);
        }
    }
    let mut search = MaxSearch {
        catalog: &catalog,
        bound_set: &bound_set,
        meter: Meter::new(budget),
        chosen: Vec::new(),
        best: incumbent,
    };
    let mut alive = VertexSet::full(n);
    search.run(&mut alive);
    let tiling: Tiling = search.best.iter().map(|&i| copy_of(g, &catalog.quads[i])).collect();
    let verdict = validate_tiling(g, &tiling, false);
    if !verdict.ok {
        return Err(Error::Invariant(format!(
            "max tiling search produced a bad tiling: {:?}",
            verdict.violations
        )));
    }
    finish(tiling.sorted(), &search.meter, budget)
}

struct MaxSearch<'a> {
    catalog: &'a QuadCatalog,
    bound_set: &'a VertexSet,
    meter: Meter,
    chosen: Vec<usize>,
    best: Vec<usize>,
}

impl MaxSearch<'_> {
    fn run(&mut self, alive: &mut VertexSet) {
        if self.meter.tick() {
            return;
        }
        let mut live = VertexSet::new(alive.universe());
        let mut pick: Option<(usize, Vertex)> = None;
        for v in alive.iter() {
            let count = self
                .catalog
                .incident(v)
                .iter()
                .filter(|&&i| quad_available(&self.catalog.quads[i], alive))
                .count();
            if count > 0 {
                live.insert(v);
                if pick.is_none_or(|(c, _)| count < c) {
                    pick = Some((count, v));
                }
            }
        }
        let outside = live.len() - live.intersection_len(self.bound_set);
        let upper = self.chosen.len() + (live.len() / 4).min(outside);
        if upper <= self.best.len() {
            return;
        }
        let Some((_, v)) = pick else {
            // no quad left; upper == chosen > best
            self.best = self.chosen.clone();
            return;
        };
        for &qi in self.catalog.incident(v) {
            let q = self.catalog.quads[qi];
            if !quad_available(&q, alive) {
                continue;
            }
            q.iter().for_each(|&x| {
                alive.remove(x);
            });
            self.chosen.push(qi);
            self.run(alive);
            self.chosen.pop();
            q.iter().for_each(|&x| {
                alive.insert(x);
            });
            if self.meter.exhausted {
                return;
            }
        }
        // leave v uncovered
        alive.remove(v);
        self.run(alive);
        alive.insert(v);
    }
}

/// Maximum-cardinality `S` with `G[S]` D-free, by include/exclude branching.
/// The bound subtracts a greedy packing of quads that still lie inside
/// `S ∪ C` with pairwise disjoint candidate parts.
pub fn max_d_free_set(g: &Hypergraph3, budget: &SearchBudget) -> Result<Bounded<Vec<Vertex>>> {
    budget.check()?;
    let n = g.n();
    let catalog = quad_catalog(g);
    let mut order: Vec<Vertex> = (0..n).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(catalog.incident(v).len()), v));
    let incumbent = bounding_d_free(g);
    let mut search = FreeSetSearch {
        catalog: &catalog,
        order,
        meter: Meter::new(budget),
        best: incumbent,
    };
    let mut chosen = VertexSet::new(n);
    let mut cand = VertexSet::full(n);
    search.run(&mut chosen, &mut cand);
    if !g.is_d_free(&search.best) {
        return Err(Error::Invariant(
            "maximum D-free search returned a set spanning D".into(),
        ));
    }
    let best = search.best.to_vec();
    finish(best, &search.meter, budget)
}

struct FreeSetSearch<'a> {
    catalog: &'a QuadCatalog,
    order: Vec<Vertex>,
    meter: Meter,
    best: VertexSet,
}

impl FreeSetSearch<'_> {
    fn run(&mut self, chosen: &mut VertexSet, cand: &mut VertexSet) {
        if self.meter.tick() {
            return;
        }
        let base = chosen.len() + cand.len();
        if base <= self.best.len() {
            return;
        }
        let mut host = chosen.clone();
        host.union_with(cand);
        let mut used = VertexSet::new(cand.universe());
        let mut packing = 0;
        for q in &self.catalog.quads {
            if !quad_available(q, &host) {
                continue;
            }
            let part: Vec<Vertex> = q.iter().copied().filter(|&v| cand.contains(v)).collect();
            if part.iter().all(|&v| !used.contains(v)) {
                part.iter().for_each(|&v| {
                    used.insert(v);
                });
                packing += 1;
            }
        }
        if base - packing <= self.best.len() {
            return;
        }
        if packing == 0 {
            // S ∪ C spans no quad, so it is D-free and beats the incumbent
            self.best = host;
            return;
        }
        let v = *self
            .order
            .iter()
            .find(|&&v| cand.contains(v))
            .expect("packing > 0 needs candidates");

        // include v
        let mut c_in = cand.clone();
        c_in.remove(v);
        chosen.insert(v);
        for &qi in self.catalog.incident(v) {
            let q = &self.catalog.quads[qi];
            let mut outside = q.iter().copied().filter(|&x| !chosen.contains(x));
            if let (Some(w), None) = (outside.next(), outside.next()) {
                c_in.remove(w);
            }
        }
        self.run(chosen, &mut c_in);
        chosen.remove(v);
        if self.meter.exhausted {
            return;
        }

        // exclude v
        cand.remove(v);
        self.run(chosen, cand);
        cand.insert(v);
    }
}

/// Exact perfect tiling of `G[vertices]`, returned in `g`'s labels.
/// Sets of at most 16 vertices use a bitmask search; larger ones go
/// through [`perfect_tiling_exact`] on the induced subgraph.
pub fn perfect_tiling_on(g: &Hypergraph3, vertices: &[Vertex], budget: &SearchBudget) -> Result<PerfectOutcome> {
    let k = vertices.len();
    if !k.is_multiple_of(4) {
        return input(format!("a perfect D-tiling needs a multiple of 4 vertices, got {k}"));
    }
    if k > 16 {
        let h = g.induced(vertices)?;
        let res = perfect_tiling_exact(&h, budget)?;
        return Ok(match res.outcome {
            PerfectOutcome::Tiled(t) => PerfectOutcome::Tiled(
                t.into_copies()
                    .into_iter()
                    .map(|d| d.mapped(|v| vertices[v]))
                    .collect::<Tiling>()
                    .sorted(),
            ),
            other => other,
        });
    }
    let mut quads_by_low: Vec<Vec<(u16, [Vertex; 4])>> = vec![Vec::new(); k];
    for a in 0..k {
        for b in a + 1..k {
            for c in b + 1..k {
                for d in c + 1..k {
                    let q = [vertices[a], vertices[b], vertices[c], vertices[d]];
                    if g.spans_d(&q) {
                        let mask = (1u16 << a) | (1 << b) | (1 << c) | (1 << d);
                        quads_by_low[a].push((mask, q));
                    }
                }
            }
        }
    }
    fn rec(free: u16, by_low: &[Vec<(u16, [Vertex; 4])>], out: &mut Vec<[Vertex; 4]>) -> bool {
        if free == 0 {
            return true;
        }
        let low = free.trailing_zeros() as usize;
        for &(mask, q) in &by_low[low] {
            if mask & free == mask {
                out.push(q);
                if rec(free & !mask, by_low, out) {
                    return true;
                }
                out.pop();
            }
        }
        false
    }
    let full: u16 = if k == 16 { u16::MAX } else { (1u16 << k) - 1 };
    let mut out = Vec::new();
    if rec(full, &quads_by_low, &mut out) {
        Ok(PerfectOutcome::Tiled(
            out.iter().map(|q| copy_of(g, q)).collect::<Tiling>().sorted(),
        ))
    } else {
        Ok(PerfectOutcome::Infeasible)
    }
}

/// True iff `G[vertices]` has a perfect D-tiling (small sets only).
pub fn is_tileable(g: &Hypergraph3, vertices: &[Vertex]) -> Result<bool> {
    Ok(matches!(
        perfect_tiling_on(g, vertices, &SearchBudget::default())?,
        PerfectOutcome::Tiled(_)
    ))
}

/// A 4-partite 4-graph with parts of equal size; each edge lists one
/// vertex from each part, in part order.
#[derive(Clone, Debug)]
pub struct FourPartite4Graph {
    parts: [Vec<Vertex>; 4],
    edges: Vec<[Vertex; 4]>,
}

impl FourPartite4Graph {
    pub fn new(parts: [Vec<Vertex>; 4], edges: Vec<[Vertex; 4]>) -> Result<Self> {
        let m = parts[0].len();
        if parts.iter().any(|p| p.len() != m) {
            return input(format!(
                "4-partite parts must have equal size, got {:?}",
                parts.iter().map(Vec::len).collect::<Vec<_>>()
            ));
        }
        let mut all: Vec<Vertex> = parts.iter().flatten().copied().collect();
        all.sort_unstable();
        if all.windows(2).any(|w| w[0] == w[1]) {
            return input("4-partite parts must be disjoint");
        }
        for e in &edges {
            for (i, v) in e.iter().enumerate() {
                if !parts[i].contains(v) {
                    return input(format!("edge {e:?} is not transversal (vertex {v} not in part {i})"));
                }
            }
        }
        let mut edges = edges;
        edges.sort_unstable();
        edges.dedup();
        Ok(FourPartite4Graph { parts, edges })
    }

    pub fn part_size(&self) -> usize {
        self.parts[0].len()
    }

    pub fn parts(&self) -> &[Vec<Vertex>; 4] {
        &self.parts
    }

    pub fn edges(&self) -> &[[Vertex; 4]] {
        &self.edges
    }

    /// Edges in local coordinates (index within each part).
    fn local_edges(&self) -> Vec<[usize; 4]> {
        let pos = |i: usize, v: Vertex| self.parts[i].iter().position(|&x| x == v).unwrap();
        self.edges
            .iter()
            .map(|e| [pos(0, e[0]), pos(1, e[1]), pos(2, e[2]), pos(3, e[3])])
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MatchingOutcome {
    Matched(Vec<[Vertex; 4]>),
    Infeasible,
    Exhausted,
}

#[derive(Clone, Debug)]
pub struct MatchingSearch {
    pub outcome: MatchingOutcome,
    pub nodes: u64,
}

/// Backtracking over the first part in order; prunes when an unmatched
/// vertex of any part has no compatible edge left.
pub fn four_partite_perfect_matching(h: &FourPartite4Graph, budget: &SearchBudget) -> Result<MatchingSearch> {
    budget.check()?;
    let m = h.part_size();
    let local = h.local_edges();
    let mut by_first: Vec<Vec<[usize; 3]>> = vec![Vec::new(); m];
    for e in &local {
        by_first[e[0]].push([e[1], e[2], e[3]]);
    }
    let mut st = MatchState {
        by_first: &by_first,
        used: [vec![false; m], vec![false; m], vec![false; m]],
        picks: Vec::with_capacity(m),
        meter: Meter::new(budget),
    };
    let found = st.run(0);
    let nodes = st.meter.nodes;
    let outcome = if found {
        let matching = st
            .picks
            .iter()
            .enumerate()
            .map(|(i, p)| [h.parts[0][i], h.parts[1][p[0]], h.parts[2][p[1]], h.parts[3][p[2]]])
            .collect();
        MatchingOutcome::Matched(matching)
    } else if st.meter.exhausted {
        MatchingOutcome::Exhausted
    } else {
        MatchingOutcome::Infeasible
    };
    Ok(MatchingSearch { outcome, nodes })
}

struct MatchState<'a> {
    by_first: &'a [Vec<[usize; 3]>],
    used: [Vec<bool>; 3],
    picks: Vec<[usize; 3]>,
    meter: Meter,
}

impl MatchState<'_> {
    fn compatible(&self, e: &[usize; 3]) -> bool {
        (0..3).all(|p| !self.used[p][e[p]])
    }

    fn run(&mut self, i: usize) -> bool {
        let m = self.by_first.len();
        if i == m {
            return true;
        }
        if self.meter.tick() {
            return false;
        }
        // every remaining vertex of every part must still be coverable
        let mut seen = [vec![false; m], vec![false; m], vec![false; m]];
        for row in &self.by_first[i..] {
            let mut any = false;
            for e in row.iter().filter(|e| self.compatible(e)) {
                any = true;
                for p in 0..3 {
                    seen[p][e[p]] = true;
                }
            }
            if !any {
                return false;
            }
        }
        for (used, seen) in self.used.iter().zip(&seen) {
            if (0..m).any(|x| !used[x] && !seen[x]) {
                return false;
            }
        }
        for e in &self.by_first[i] {
            if !self.compatible(e) {
                continue;
            }
            for (used, &x) in self.used.iter_mut().zip(e) {
                used[x] = true;
            }
            self.picks.push(*e);
            if self.run(i + 1) {
                return true;
            }
            self.picks.pop();
            for (used, &x) in self.used.iter_mut().zip(e) {
                used[x] = false;
            }
            if self.meter.exhausted {
                return false;
            }
        }
        false
    }
}

/// The minimum-degree hypothesis for perfect matchings in balanced
/// 4-partite 4-graphs: `m·δ(V₁) + m³·δ(V₂,V₃,V₄) ≥ (1+γ)m⁴`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchingDegreeCondition {
    pub m: usize,
    pub gamma: f64,
    pub min_first_degree: usize,
    pub min_triple_degree: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

pub fn matching_degree_condition(h: &FourPartite4Graph, gamma: f64) -> MatchingDegreeCondition {
    let m = h.part_size();
    let local = h.local_edges();
    let mut first = vec![0usize; m];
    let mut triple = vec![0usize; m * m * m];
    for e in &local {
        first[e[0]] += 1;
        triple[(e[1] * m + e[2]) * m + e[3]] += 1;
    }
    let min_first_degree = first.iter().copied().min().unwrap_or(0);
    let min_triple_degree = triple.iter().copied().min().unwrap_or(0);
    let mf = m as f64;
    let lhs = mf * min_first_degree as f64 + mf.powi(3) * min_triple_degree as f64;
    let rhs = (1.0 + gamma) * mf.powi(4);
    MatchingDegreeCondition {
        m,
        gamma,
        min_first_degree,
        min_triple_degree,
        lhs,
        rhs,
        holds: lhs >= rhs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{complete_3graph, construct_g0, construct_g1, planted_extremal, steiner_triple_system};

    fn budget() -> SearchBudget {
        SearchBudget::default()
    }

    #[test]
    fn catalog_contents() {
        assert_eq!(quad_catalog(&complete_3graph(8).unwrap()).len(), 70);
        assert!(quad_catalog(&steiner_triple_system(9).unwrap()).is_empty());
        let cat = quad_catalog(&construct_g0(8).unwrap());
        assert!(cat.quads().iter().all(|q| q.contains(&0)));
        assert!(cat.contains(&[3, 0, 2, 1]));
    }

    #[test]
    fn perfect_tilings() {
        let k8 = complete_3graph(8).unwrap();
        match perfect_tiling_exact(&k8, &budget()).unwrap().outcome {
            PerfectOutcome::Tiled(t) => assert_eq!(t.len(), 2),
            other => panic!("{other:?}"),
        }
        let g1 = construct_g1(8).unwrap();
        assert_eq!(
            perfect_tiling_exact(&g1, &budget()).unwrap().outcome,
            PerfectOutcome::Infeasible
        );

        let gadgets = Hypergraph3::build(8, [[0, 1, 2], [0, 1, 3], [4, 5, 6], [4, 5, 7]]).unwrap();
        let expected = Tiling::new(vec![
            DCopy::from_edges([0, 1, 2], [0, 1, 3]).unwrap(),
            DCopy::from_edges([4, 5, 6], [4, 5, 7]).unwrap(),
        ]);
        assert_eq!(
            perfect_tiling_exact(&gadgets, &budget()).unwrap().outcome,
            PerfectOutcome::Tiled(expected)
        );
        assert!(perfect_tiling_exact(&complete_3graph(6).unwrap(), &budget()).is_err());
    }

    #[test]
    fn exhaustion_is_not_infeasibility() {
        let g = planted_extremal(16).unwrap();
        let tiny = SearchBudget::nodes(1);
        assert_eq!(
            perfect_tiling_exact(&g, &tiny).unwrap().outcome,
            PerfectOutcome::Exhausted
        );
        let fail = SearchBudget {
            on_exhaust: OnExhaust::Fail,
            ..tiny
        };
        assert!(matches!(max_d_free_set(&g, &fail), Err(Error::BudgetExhausted { .. })));
        assert!(perfect_tiling_exact(&g, &SearchBudget::nodes(0)).is_err());
    }

    #[test]
    fn max_tilings() {
        let r = max_tiling_exact(&construct_g0(8).unwrap(), &budget()).unwrap();
        assert_eq!(r.value.len(), 1);
        assert!(r.optimal);
        assert_eq!(
            max_tiling_exact(&complete_3graph(8).unwrap(), &budget())
                .unwrap()
                .value
                .len(),
            2
        );
        assert_eq!(
            max_tiling_exact(&steiner_triple_system(7).unwrap(), &budget())
                .unwrap()
                .value
                .len(),
            0
        );
    }

    #[test]
    fn max_free_sets() {
        let r = max_d_free_set(&planted_extremal(8).unwrap(), &budget()).unwrap();
        assert_eq!(r.value, vec![2, 3, 4, 5, 6, 7]);
        assert!(r.optimal);
        assert_eq!(
            max_d_free_set(&complete_3graph(8).unwrap(), &budget())
                .unwrap()
                .value
                .len(),
            3
        );
        assert_eq!(
            max_d_free_set(&Hypergraph3::empty(8), &budget()).unwrap().value.len(),
            8
        );
    }

    #[test]
    fn small_tileability() {
        let k12 = complete_3graph(12).unwrap();
        assert!(is_tileable(&k12, &[0, 2, 4, 6, 8, 10, 11, 1]).unwrap());
        assert!(!is_tileable(&Hypergraph3::empty(8), &[0, 1, 2, 3]).unwrap());
        assert!(perfect_tiling_on(&k12, &[0, 1, 2], &budget()).is_err());
        let k20 = complete_3graph(20).unwrap();
        let all: Vec<usize> = (0..20).collect();
        assert!(is_tileable(&k20, &all).unwrap());
    }

    fn complete_4partite(m: usize) -> FourPartite4Graph {
        let parts: [Vec<usize>; 4] = std::array::from_fn(|i| (i * m..(i + 1) * m).collect());
        let mut edges = Vec::new();
        for a in 0..m {
            for b in m..2 * m {
                for c in 2 * m..3 * m {
                    for d in 3 * m..4 * m {
                        edges.push([a, b, c, d]);
                    }
                }
            }
        }
        FourPartite4Graph::new(parts, edges).unwrap()
    }

    #[test]
    fn four_partite_matching() {
        let h = complete_4partite(3);
        match four_partite_perfect_matching(&h, &budget()).unwrap().outcome {
            MatchingOutcome::Matched(mm) => assert_eq!(mm.len(), 3),
            other => panic!("{other:?}"),
        }
        let cond = matching_degree_condition(&h, 0.5);
        assert_eq!((cond.min_first_degree, cond.min_triple_degree), (27, 3));
        assert!(cond.holds);

        let isolated: Vec<[usize; 4]> = h.edges().iter().copied().filter(|e| e[0] != 0).collect();
        let h2 = FourPartite4Graph::new(h.parts().clone(), isolated).unwrap();
        assert_eq!(
            four_partite_perfect_matching(&h2, &budget()).unwrap().outcome,
            MatchingOutcome::Infeasible
        );
        assert!(FourPartite4Graph::new([vec![0], vec![1], vec![2], vec![3, 4]], vec![]).is_err());
        assert!(FourPartite4Graph::new([vec![0], vec![1], vec![2], vec![3]], vec![[1, 0, 2, 3]]).is_err());
    }
}
