//! 3-uniform hypergraphs, copies of D (two triples on four points), and
//! tiling certificates.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bitset::VertexSet;
use crate::error::{input, Result};

pub type Vertex = usize;
pub type Triple = [Vertex; 3];

/// A simple 3-graph on vertices `0..n` with a pair-neighbourhood index.
///
/// Immutable after [`Hypergraph3::build`]; share it freely across threads.
#[derive(Clone)]
pub struct Hypergraph3 {
    n: usize,
    edges: Vec<Triple>,
    // Indexed by `min * n + max`; entries with `min >= max` stay empty.
    pair_index: Vec<VertexSet>,
}

impl Hypergraph3 {
    /// Builds a hypergraph, deduplicating triples. Triples may be given in
    /// any vertex order.
    pub fn build(n: usize, triples: impl IntoIterator<Item = Triple>) -> Result<Self> {
        let mut edges = Vec::new();
        for t in triples {
            let mut s = t;
            s.sort_unstable();
            if s[2] >= n {
                return input(format!("triple {t:?} has a vertex outside 0..{n}"));
            }
            if s[0] == s[1] || s[1] == s[2] {
                return input(format!("triple {t:?} repeats a vertex"));
            }
            edges.push(s);
        }
        edges.sort_unstable();
        edges.dedup();

        let mut pair_index = vec![VertexSet::default(); n * n];
        for u in 0..n {
            for v in u + 1..n {
                pair_index[u * n + v] = VertexSet::new(n);
            }
        }
        for &[a, b, c] in &edges {
            pair_index[a * n + b].insert(c);
            pair_index[a * n + c].insert(b);
            pair_index[b * n + c].insert(a);
        }
        Ok(Hypergraph3 { n, edges, pair_index })
    }

    /// The hypergraph with no edges.
    pub fn empty(n: usize) -> Self {
        Self::build(n, std::iter::empty()).expect("edgeless graph is always valid")
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Edges as sorted triples, in lexicographic order.
    pub fn edges(&self) -> &[Triple] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_set(&self) -> VertexSet {
        VertexSet::full(self.n)
    }

    /// `N(u, v)`. Callers guarantee `u != v`, both `< n`.
    #[inline]
    pub fn neighbors(&self, u: Vertex, v: Vertex) -> &VertexSet {
        debug_assert!(u != v && u < self.n && v < self.n);
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        &self.pair_index[a * self.n + b]
    }

    #[inline]
    pub fn has_edge(&self, a: Vertex, b: Vertex, c: Vertex) -> bool {
        a != b && a < self.n && b < self.n && self.neighbors(a, b).contains(c)
    }

    pub fn has_triple(&self, t: &Triple) -> bool {
        self.has_edge(t[0], t[1], t[2])
    }

    pub fn codegree(&self, u: Vertex, v: Vertex) -> Result<usize> {
        if u == v || u >= self.n || v >= self.n {
            return input(format!(
                "codegree needs two distinct vertices below {}, got ({u}, {v})",
                self.n
            ));
        }
        Ok(self.neighbors(u, v).len())
    }

    /// Minimum pair-degree; 0 when there are fewer than two vertices.
    pub fn min_codegree(&self) -> usize {
        self.pairs().map(|(u, v)| self.neighbors(u, v).len()).min().unwrap_or(0)
    }

    pub fn max_codegree(&self) -> usize {
        self.pairs().map(|(u, v)| self.neighbors(u, v).len()).max().unwrap_or(0)
    }

    /// Number of edges containing each vertex.
    pub fn vertex_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for e in &self.edges {
            for &v in e {
                deg[v] += 1;
            }
        }
        deg
    }

    fn pairs(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        (0..self.n).flat_map(move |u| (u + 1..self.n).map(move |v| (u, v)))
    }

    /// The link graph `{ {w, w'} ⊆ W : {v, w, w'} ∈ E }`, pairs sorted.
    pub fn link_on(&self, v: Vertex, within: &VertexSet) -> Result<Vec<(Vertex, Vertex)>> {
        if v >= self.n {
            return input(format!("vertex {v} outside 0..{}", self.n));
        }
        if within.contains(v) {
            return input(format!("vertex {v} lies inside the link's host set"));
        }
        let mut out = Vec::new();
        for w in within.iter() {
            for x in self.neighbors(v, w).iter() {
                if x > w && within.contains(x) {
                    out.push((w, x));
                }
            }
        }
        Ok(out)
    }

    /// `|H_v[W]|` for `v ∉ W`, counted without materialising the pairs.
    pub fn link_size_on(&self, v: Vertex, within: &VertexSet) -> usize {
        let twice: usize = within
            .iter()
            .filter(|&w| w != v)
            .map(|w| self.neighbors(v, w).intersection_len(within))
            .sum();
        twice / 2
    }

    /// Every pair of distinct edges sharing exactly two vertices, each as a
    /// canonical [`DCopy`], restricted to `within` when given.
    pub fn d_copies(&self, within: Option<&VertexSet>) -> Vec<DCopy> {
        let mut out = Vec::new();
        self.for_each_d_copy(within, |d| {
            out.push(d);
            true
        });
        out
    }

    pub fn d_copy_count(&self, within: Option<&VertexSet>) -> usize {
        let all;
        let s = match within {
            Some(s) => s,
            None => {
                all = self.vertex_set();
                &all
            }
        };
        let verts = s.to_vec();
        let mut total = 0;
        for (i, &u) in verts.iter().enumerate() {
            for &v in &verts[i + 1..] {
                let c = self.neighbors(u, v).intersection_len(s);
                total += c * c.saturating_sub(1) / 2;
            }
        }
        total
    }

    /// Visits copies in canonical order until `f` returns `false`.
    fn for_each_d_copy(&self, within: Option<&VertexSet>, mut f: impl FnMut(DCopy) -> bool) {
        let all;
        let s = match within {
            Some(s) => s,
            None => {
                all = self.vertex_set();
                &all
            }
        };
        let verts = s.to_vec();
        for (i, &u) in verts.iter().enumerate() {
            for &v in &verts[i + 1..] {
                let nb = self.neighbors(u, v).intersection(s).to_vec();
                for (j, &w) in nb.iter().enumerate() {
                    for &x in &nb[j + 1..] {
                        if !f(DCopy::from_parts([u, v], [w, x])) {
                            return;
                        }
                    }
                }
            }
        }
    }

    pub fn first_d_copy(&self, within: &VertexSet) -> Option<DCopy> {
        let mut found = None;
        self.for_each_d_copy(Some(within), |d| {
            found = Some(d);
            false
        });
        found
    }

    /// True iff `G[S]` contains no copy of D.
    pub fn is_d_free(&self, s: &VertexSet) -> bool {
        if s.len() < 4 {
            return true;
        }
        let verts = s.to_vec();
        for (i, &u) in verts.iter().enumerate() {
            for &v in &verts[i + 1..] {
                if self.neighbors(u, v).intersection_len(s) >= 2 {
                    return false;
                }
            }
        }
        true
    }

    /// For a D-free `S` and `v ∉ S`: does `S ∪ {v}` contain a copy of D?
    /// Only copies through `v` are examined.
    pub fn creates_d_copy(&self, s: &VertexSet, v: Vertex) -> bool {
        for z in s.iter() {
            if z == v {
                continue;
            }
            let common = self.neighbors(v, z).intersection(s);
            if common.len() >= 2 {
                return true;
            }
            // copies whose shared pair is {z, z'} with v private
            for z2 in common.iter() {
                if self.neighbors(z, z2).intersects(s) {
                    return true;
                }
            }
        }
        false
    }

    /// Number of edges of `G[Q]` for a 4-set `Q`.
    pub fn quad_edge_count(&self, q: &[Vertex; 4]) -> usize {
        quad_triples(q).iter().filter(|t| self.has_triple(t)).count()
    }

    /// A 4-set spans D iff it induces at least two edges (any two triples
    /// on four points meet in two points).
    pub fn spans_d(&self, q: &[Vertex; 4]) -> bool {
        self.quad_edge_count(q) >= 2
    }

    /// The D-copy witnessed by the first two induced edges of `q` in
    /// lexicographic order, if any.
    pub fn d_copy_on(&self, q: &[Vertex; 4]) -> Option<DCopy> {
        let mut s = *q;
        s.sort_unstable();
        let mut present = quad_triples(&s).into_iter().filter(|t| self.has_triple(t));
        let a = present.next()?;
        let b = present.next()?;
        DCopy::from_edges(a, b).ok()
    }

    /// The induced subhypergraph on `vertices`, relabelled so that
    /// `vertices[i]` becomes `i`.
    pub fn induced(&self, vertices: &[Vertex]) -> Result<Hypergraph3> {
        let mut local = vec![usize::MAX; self.n];
        for (i, &v) in vertices.iter().enumerate() {
            if v >= self.n {
                return input(format!("vertex {v} outside 0..{}", self.n));
            }
            if local[v] != usize::MAX {
                return input(format!("vertex {v} listed twice"));
            }
            local[v] = i;
        }
        let edges = self
            .edges
            .iter()
            .filter(|e| e.iter().all(|&v| local[v] != usize::MAX))
            .map(|e| [local[e[0]], local[e[1]], local[e[2]]]);
        Hypergraph3::build(vertices.len(), edges)
    }

    /// Applies a vertex relabelling `v -> perm[v]`.
    pub fn relabel(&self, perm: &[Vertex]) -> Result<Hypergraph3> {
        if perm.len() != self.n {
            return input("relabelling must cover every vertex");
        }
        Hypergraph3::build(self.n, self.edges.iter().map(|e| [perm[e[0]], perm[e[1]], perm[e[2]]]))
    }
}

impl PartialEq for Hypergraph3 {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.edges == other.edges
    }
}

impl Eq for Hypergraph3 {}

impl fmt::Debug for Hypergraph3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Hypergraph3")
            .field("n", &self.n)
            .field("edges", &self.edges.len())
            .finish()
    }
}

/// The four 3-subsets of a sorted 4-set, in lexicographic order.
pub fn quad_triples(q: &[Vertex; 4]) -> [Triple; 4] {
    let [a, b, c, d] = *q;
    [[a, b, c], [a, b, d], [a, c, d], [b, c, d]]
}

/// A copy of D: four vertices and two edges meeting in exactly two of them.
///
/// Canonical form: `edge_a` carries the smaller private vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DCopy {
    vertices: [Vertex; 4],
    edge_a: Triple,
    edge_b: Triple,
}

impl DCopy {
    fn from_parts(shared: [Vertex; 2], private: [Vertex; 2]) -> DCopy {
        let mut vertices = [shared[0], shared[1], private[0], private[1]];
        vertices.sort_unstable();
        let mut edge_a = [shared[0], shared[1], private[0]];
        let mut edge_b = [shared[0], shared[1], private[1]];
        edge_a.sort_unstable();
        edge_b.sort_unstable();
        DCopy {
            vertices,
            edge_a,
            edge_b,
        }
    }

    /// Builds the copy witnessed by two triples. They must be distinct and
    /// share exactly two vertices.
    pub fn from_edges(e1: Triple, e2: Triple) -> Result<DCopy> {
        let mut a = e1;
        let mut b = e2;
        a.sort_unstable();
        b.sort_unstable();
        if a[0] == a[1] || a[1] == a[2] || b[0] == b[1] || b[1] == b[2] {
            return input(format!("degenerate triple in {e1:?}, {e2:?}"));
        }
        let shared: Vec<Vertex> = a.iter().copied().filter(|v| b.contains(v)).collect();
        if shared.len() != 2 {
            return input(format!(
                "edges {e1:?} and {e2:?} share {} vertices, need exactly 2",
                shared.len()
            ));
        }
        let pa = a.iter().copied().find(|v| !shared.contains(v)).unwrap();
        let pb = b.iter().copied().find(|v| !shared.contains(v)).unwrap();
        let private = if pa < pb { [pa, pb] } else { [pb, pa] };
        Ok(DCopy::from_parts([shared[0], shared[1]], private))
    }

    pub fn vertices(&self) -> [Vertex; 4] {
        self.vertices
    }

    pub fn edges(&self) -> [Triple; 2] {
        [self.edge_a, self.edge_b]
    }

    pub fn shared_pair(&self) -> [Vertex; 2] {
        let s: Vec<Vertex> = self
            .edge_a
            .iter()
            .copied()
            .filter(|v| self.edge_b.contains(v))
            .collect();
        [s[0], s[1]]
    }

    pub fn private_pair(&self) -> [Vertex; 2] {
        let a = self.edge_a.iter().copied().find(|v| !self.edge_b.contains(v)).unwrap();
        let b = self.edge_b.iter().copied().find(|v| !self.edge_a.contains(v)).unwrap();
        [a, b]
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.vertices.contains(&v)
    }

    /// Relabels through `map`, re-canonicalising.
    pub fn mapped(&self, map: impl Fn(Vertex) -> Vertex) -> DCopy {
        let f = |t: Triple| [map(t[0]), map(t[1]), map(t[2])];
        DCopy::from_edges(f(self.edge_a), f(self.edge_b)).expect("injective relabelling preserves shape")
    }

    fn key(&self) -> ([Vertex; 2], [Vertex; 2]) {
        (self.shared_pair(), self.private_pair())
    }
}

impl PartialOrd for DCopy {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DCopy {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

/// A (possibly partial) D-tiling: a list of copies, expected to be
/// vertex-disjoint. Use [`validate_tiling`] to check.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tiling {
    copies: Vec<DCopy>,
}

impl Tiling {
    pub fn new(copies: Vec<DCopy>) -> Self {
        Tiling { copies }
    }

    pub fn copies(&self) -> &[DCopy] {
        &self.copies
    }

    pub fn len(&self) -> usize {
        self.copies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.copies.is_empty()
    }

    pub fn push(&mut self, d: DCopy) {
        self.copies.push(d);
    }

    pub fn extend(&mut self, other: Tiling) {
        self.copies.extend(other.copies);
    }

    /// Covered vertices, sorted; duplicates kept if copies overlap.
    pub fn covered(&self) -> Vec<Vertex> {
        let mut out: Vec<Vertex> = self.copies.iter().flat_map(|d| d.vertices()).collect();
        out.sort_unstable();
        out
    }

    pub fn covered_set(&self, n: usize) -> VertexSet {
        VertexSet::from_iter_in(n, self.copies.iter().flat_map(|d| d.vertices()).filter(|&v| v < n))
    }

    /// Copies sorted by their smallest vertex, for stable output.
    pub fn sorted(mut self) -> Self {
        self.copies.sort_by_key(|d| d.vertices());
        self
    }

    pub fn into_copies(self) -> Vec<DCopy> {
        self.copies
    }
}

impl FromIterator<DCopy> for Tiling {
    fn from_iter<I: IntoIterator<Item = DCopy>>(iter: I) -> Self {
        Tiling::new(iter.into_iter().collect())
    }
}

/// Outcome of certificate validation.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub ok: bool,
    pub violations: Vec<String>,
}

impl Verdict {
    fn from_violations(violations: Vec<String>) -> Self {
        Verdict {
            ok: violations.is_empty(),
            violations,
        }
    }
}

/// Checks that every copy's edges exist in `g`, that copies are pairwise
/// disjoint, and (when `require_perfect`) that they cover all of `V`.
pub fn validate_tiling(g: &Hypergraph3, t: &Tiling, require_perfect: bool) -> Verdict {
    let n = g.n();
    let mut violations = Vec::new();
    let mut owner: BTreeMap<Vertex, usize> = BTreeMap::new();
    for (i, d) in t.copies().iter().enumerate() {
        let mut in_range = true;
        for v in d.vertices() {
            if v >= n {
                violations.push(format!("out-of-range vertex {v} in copy {i} (n = {n})"));
                in_range = false;
            }
        }
        if in_range {
            for e in d.edges() {
                if !g.has_triple(&e) {
                    violations.push(format!("missing edge {{{}, {}, {}}} in copy {i}", e[0], e[1], e[2]));
                }
            }
        }
        for v in d.vertices() {
            if let Some(&j) = owner.get(&v) {
                violations.push(format!("overlap: vertex {v} in copies {j} and {i}"));
            } else {
                owner.insert(v, i);
            }
        }
    }
    if require_perfect {
        if !n.is_multiple_of(4) {
            violations.push(format!("not perfect: n = {n} is not divisible by 4"));
        } else {
            let missing: Vec<Vertex> = (0..n).filter(|v| !owner.contains_key(v)).collect();
            if let Some(&first) = missing.first() {
                violations.push(format!(
                    "not perfect: {} vertices uncovered (first {first})",
                    missing.len()
                ));
            }
        }
    }
    Verdict::from_violations(violations)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k4() -> Hypergraph3 {
        Hypergraph3::build(4, [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]]).unwrap()
    }

    fn complete(n: usize) -> Hypergraph3 {
        let mut t = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    t.push([a, b, c]);
                }
            }
        }
        Hypergraph3::build(n, t).unwrap()
    }

    #[test]
    fn build_dedups_and_rejects_bad_triples() {
        assert_eq!(k4().edge_count(), 4);
        let g = Hypergraph3::build(4, [[0, 1, 2], [2, 1, 0]]).unwrap();
        assert_eq!(g.edge_count(), 1);
        let err = Hypergraph3::build(3, [[0, 1, 3]]).unwrap_err();
        assert!(err.to_string().contains("[0, 1, 3]"), "{err}");
        assert!(Hypergraph3::build(5, [[1, 1, 2]]).is_err());
    }

    #[test]
    fn codegree_queries() {
        let g = complete(6);
        assert_eq!(g.codegree(2, 5).unwrap(), 4);
        assert_eq!(g.min_codegree(), 4);
        assert!(g.codegree(1, 1).is_err());
        assert!(g.codegree(0, 6).is_err());
        assert_eq!(Hypergraph3::empty(1).min_codegree(), 0);
        assert_eq!(Hypergraph3::empty(0).min_codegree(), 0);
    }

    #[test]
    fn link_graphs() {
        let w = VertexSet::from_iter_in(5, [1, 2, 3]);
        assert_eq!(complete(5).link_on(0, &w).unwrap(), vec![(1, 2), (1, 3), (2, 3)]);
        assert!(Hypergraph3::empty(5).link_on(0, &w).unwrap().is_empty());
        let g = Hypergraph3::build(4, [[0, 1, 2], [0, 2, 3]]).unwrap();
        let w4 = VertexSet::from_iter_in(4, [1, 2, 3]);
        assert_eq!(g.link_on(0, &w4).unwrap(), vec![(1, 2), (2, 3)]);
        assert_eq!(g.link_size_on(0, &w4), 2);
        assert!(g.link_on(1, &w4).is_err());
    }

    #[test]
    fn d_copy_enumeration() {
        assert_eq!(k4().d_copies(None).len(), 6);
        assert_eq!(k4().d_copy_count(None), 6);
        let g = Hypergraph3::build(6, [[0, 1, 2], [3, 4, 5]]).unwrap();
        assert!(g.d_copies(None).is_empty());
        let copies = complete(6).d_copies(None);
        let mut sorted = copies.clone();
        sorted.sort();
        assert_eq!(copies, sorted, "enumeration is in canonical order");
    }

    #[test]
    fn d_freeness() {
        assert!(!k4().is_d_free(&k4().vertex_set()));
        let g = complete(8);
        assert!(g.is_d_free(&VertexSet::from_iter_in(8, [0, 4, 7])));
    }

    #[test]
    fn dcopy_shape() {
        let d = DCopy::from_edges([2, 1, 0], [0, 3, 1]).unwrap();
        assert_eq!(d.vertices(), [0, 1, 2, 3]);
        assert_eq!(d.shared_pair(), [0, 1]);
        assert_eq!(d.private_pair(), [2, 3]);
        assert!(DCopy::from_edges([0, 1, 2], [0, 1, 2]).is_err());
        assert!(DCopy::from_edges([0, 1, 2], [0, 3, 4]).is_err());
    }

    #[test]
    fn validation_findings() {
        let g = complete(8);
        let a = DCopy::from_edges([0, 1, 2], [0, 1, 3]).unwrap();
        let b = DCopy::from_edges([4, 5, 6], [4, 5, 7]).unwrap();
        let good = Tiling::new(vec![a, b]);
        assert!(validate_tiling(&g, &good, true).ok);

        let c = DCopy::from_edges([3, 4, 5], [3, 4, 6]).unwrap();
        let v = validate_tiling(&g, &Tiling::new(vec![a, c]), false);
        assert!(!v.ok);
        assert!(v.violations.iter().any(|s| s.starts_with("overlap")));

        let sparse = Hypergraph3::build(8, [[0, 1, 2]]).unwrap();
        let v = validate_tiling(&sparse, &Tiling::new(vec![a]), false);
        assert!(v.violations.iter().any(|s| s.starts_with("missing edge")));

        let v = validate_tiling(&g, &Tiling::new(vec![a]), true);
        assert!(v.violations.iter().any(|s| s.starts_with("not perfect")));

        let far = DCopy::from_edges([7, 8, 9], [7, 8, 10]).unwrap();
        let v = validate_tiling(&g, &Tiling::new(vec![far]), false);
        assert!(v.violations.iter().any(|s| s.starts_with("out-of-range vertex")));
    }

    #[test]
    fn induced_relabels() {
        let g = complete(6);
        let h = g.induced(&[5, 3, 1, 0]).unwrap();
        assert_eq!(h.n(), 4);
        assert_eq!(h.edge_count(), 4);
        assert!(g.induced(&[1, 1]).is_err());
    }
}
