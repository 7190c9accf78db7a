//! Staged tiling for graphs with a near-extremal D-free set.
//!
//! Starting from a maximal D-free set `Z`, the remaining vertices split into
//! `X` (almost complete link on `Z`) and a small leftover `Y`. Four partial
//! tilings are then built in order:
//!
//! - `Q`: copies with one vertex in `Y` and three in `Z`, as many as possible;
//! - `R`: one copy for every `y` missed by `Q`, shape `Y + X + 2Z`;
//! - `S`: `q − ℓ` copies of shape `2X + 2Z`, where `ℓ = n/4 − |X|`;
//! - `T`: a perfect matching of the auxiliary 4-partite 4-graph on what is
//!   left of `X` and `Z`, which must be `m` and `3m` vertices.
//!
//! The inequalities that guarantee each stage in the asymptotic argument are
//! evaluated as [`Diagnostic`]s and never assumed; a stage that cannot be
//! completed returns [`Error::StageFailure`].

use serde::{Deserialize, Serialize};

use crate::bitset::VertexSet;
use crate::error::{input, Error, Result};
use crate::exact::{
    four_partite_perfect_matching, matching_degree_condition, FourPartite4Graph, MatchingDegreeCondition,
    MatchingOutcome, SearchBudget,
};
use crate::hypergraph::{validate_tiling, DCopy, Hypergraph3, Tiling, Vertex};

/// `|Y|` up to which `Q` is computed exactly.
pub const EXACT_Q_LIMIT: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtremalParams {
    /// Link threshold for `X`: `|N(x) ∩ (Z choose 2)| ≥ (1 − alpha)·C(|Z|, 2)`.
    pub alpha: f64,
    /// Extremality slack used only by the size diagnostics.
    pub eps0: f64,
}

impl Default for ExtremalParams {
    fn default() -> Self {
        Self::with_alpha(0.3)
    }
}

impl ExtremalParams {
    /// Couples `eps0 = alpha³`.
    pub fn with_alpha(alpha: f64) -> Self {
        ExtremalParams {
            alpha,
            eps0: alpha.powi(3),
        }
    }
}

/// A named inequality evaluated at runtime.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub name: String,
    pub holds: bool,
    pub detail: String,
}

impl Diagnostic {
    fn new(name: &str, holds: bool, detail: String) -> Self {
        Diagnostic {
            name: name.to_string(),
            holds,
            detail,
        }
    }
}

/// Grows a D-free `s0` to a maximal D-free set, trying vertices in
/// ascending order.
pub fn extend_to_maximal_d_free(g: &Hypergraph3, s0: &VertexSet) -> Result<VertexSet> {
    if s0.universe() != g.n() {
        return input(format!("set universe {} differs from n = {}", s0.universe(), g.n()));
    }
    if !g.is_d_free(s0) {
        return input("starting set already spans a copy of D");
    }
    let mut z = s0.clone();
    // one pass suffices: a rejected vertex stays rejected as z grows
    for v in 0..g.n() {
        if !z.contains(v) && !g.creates_d_copy(&z, v) {
            z.insert(v);
        }
    }
    Ok(z)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct XyzPartition {
    pub x: Vec<Vertex>,
    pub y: Vec<Vertex>,
    pub z: Vec<Vertex>,
    pub alpha: f64,
}

/// Splits `V \ Z` by link size on `Z` and evaluates the size estimates
/// expected of an extremal graph.
pub fn partition_xyz(
    g: &Hypergraph3,
    z: &VertexSet,
    params: &ExtremalParams,
) -> Result<(XyzPartition, Vec<Diagnostic>)> {
    let alpha = params.alpha;
    if !(alpha > 0.0 && alpha < 1.0) {
        return input(format!("alpha must lie in (0, 1), got {alpha}"));
    }
    if z.universe() != g.n() {
        return input(format!("set universe {} differs from n = {}", z.universe(), g.n()));
    }
    if !g.is_d_free(z) {
        return input("Z spans a copy of D");
    }
    if let Some(v) = (0..g.n()).find(|&v| !z.contains(v) && !g.creates_d_copy(z, v)) {
        return input(format!("Z is not maximal: vertex {v} can be added"));
    }
    let zs = z.len() as f64;
    let threshold = (1.0 - alpha) * zs * (zs - 1.0) / 2.0;
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for v in (0..g.n()).filter(|&v| !z.contains(v)) {
        if g.link_size_on(v, z) as f64 >= threshold {
            x.push(v);
        } else {
            y.push(v);
        }
    }
    let part = XyzPartition {
        x,
        y,
        z: z.to_vec(),
        alpha,
    };
    let diags = size_diagnostics(g, &part, params);
    Ok((part, diags))
}

fn size_diagnostics(g: &Hypergraph3, p: &XyzPartition, params: &ExtremalParams) -> Vec<Diagnostic> {
    let k = g.n() as f64 / 4.0;
    let (a2, e0) = (params.alpha * params.alpha, params.eps0);
    let (xs, ys, zs) = (p.x.len() as f64, p.y.len() as f64, p.z.len() as f64);
    let ell = k - xs;
    let mut out = vec![
        Diagnostic::new(
            "x_size_bounds",
            k * (1.0 - 4.0 * a2) <= xs && xs <= k * (1.0 + 3.0 * e0),
            format!(
                "|X| = {xs} in [{:.3}, {:.3}]",
                k * (1.0 - 4.0 * a2),
                k * (1.0 + 3.0 * e0)
            ),
        ),
        Diagnostic::new(
            "y_size_bound",
            ys <= 4.0 * a2 * k,
            format!("|Y| = {ys} <= {:.3}", 4.0 * a2 * k),
        ),
        Diagnostic::new(
            "z_size_lower",
            3.0 * k * (1.0 - e0) <= zs && zs <= 3.0 * k,
            format!("|Z| = {zs} in [{:.3}, {:.3}]", 3.0 * k * (1.0 - e0), 3.0 * k),
        ),
        Diagnostic::new(
            "ell_range",
            -3.0 * e0 * k <= ell && ell <= 4.0 * a2 * k,
            format!("l = {ell} in [{:.3}, {:.3}]", -3.0 * e0 * k, 4.0 * a2 * k),
        ),
    ];
    // every pair inside Z sees most of X
    let xset = VertexSet::from_iter_in(g.n(), p.x.iter().copied());
    let need = (1.0 - params.alpha) * xs;
    let mut worst = usize::MAX;
    for (i, &a) in p.z.iter().enumerate() {
        for &b in &p.z[i + 1..] {
            worst = worst.min(g.neighbors(a, b).intersection_len(&xset));
        }
    }
    if worst != usize::MAX {
        out.push(Diagnostic::new(
            "zz_link_into_x",
            worst as f64 >= need,
            format!("min |N(z, z') ∩ X| = {worst}, need {need:.3}"),
        ));
    }
    out
}

/// Bookkeeping for the four stages.
#[derive(Clone, Debug)]
pub struct PipelineState {
    pub partition: XyzPartition,
    pub params: ExtremalParams,
    pub q_tiling: Tiling,
    pub r_tiling: Tiling,
    pub s_tiling: Tiling,
    pub t_tiling: Tiling,
    /// Covered vertices of each class so far.
    pub covered_x: VertexSet,
    pub covered_y: VertexSet,
    pub covered_z: VertexSet,
    pub q: usize,
    pub ell: i64,
    pub m: Option<usize>,
    /// Whether `Q` is provably maximum.
    pub q_exact: bool,
    pub matching_nodes: u64,
    pub matching_condition: Option<MatchingDegreeCondition>,
    pub diagnostics: Vec<Diagnostic>,
    x_set: VertexSet,
    z_set: VertexSet,
    k: usize,
}

impl PipelineState {
    pub fn new(
        g: &Hypergraph3,
        partition: XyzPartition,
        params: ExtremalParams,
        diagnostics: Vec<Diagnostic>,
    ) -> Result<Self> {
        let n = g.n();
        if !n.is_multiple_of(4) {
            return input(format!("the staged tiling needs n divisible by 4, got {n}"));
        }
        let k = n / 4;
        let x_set = VertexSet::from_iter_in(n, partition.x.iter().copied());
        let z_set = VertexSet::from_iter_in(n, partition.z.iter().copied());
        let ell = k as i64 - partition.x.len() as i64;
        Ok(PipelineState {
            partition,
            params,
            q_tiling: Tiling::default(),
            r_tiling: Tiling::default(),
            s_tiling: Tiling::default(),
            t_tiling: Tiling::default(),
            covered_x: VertexSet::new(n),
            covered_y: VertexSet::new(n),
            covered_z: VertexSet::new(n),
            q: 0,
            ell,
            m: None,
            q_exact: true,
            matching_nodes: 0,
            matching_condition: None,
            diagnostics,
            x_set,
            z_set,
            k,
        })
    }

    fn diag(&mut self, name: &str, holds: bool, detail: String) {
        self.diagnostics.push(Diagnostic::new(name, holds, detail));
    }

    fn take(&mut self, d: &DCopy) {
        for v in d.vertices() {
            if self.x_set.contains(v) {
                self.covered_x.insert(v);
            } else if self.z_set.contains(v) {
                self.covered_z.insert(v);
            } else {
                self.covered_y.insert(v);
            }
        }
    }

    fn uncovered_z(&self) -> Vec<Vertex> {
        self.partition
            .z
            .iter()
            .copied()
            .filter(|&v| !self.covered_z.contains(v))
            .collect()
    }

    fn uncovered_x_set(&self) -> VertexSet {
        self.x_set.difference(&self.covered_x)
    }

    /// All stage copies so far.
    pub fn union(&self) -> Tiling {
        let mut t = self.q_tiling.clone();
        t.extend(self.r_tiling.clone());
        t.extend(self.s_tiling.clone());
        t.extend(self.t_tiling.clone());
        t
    }

    fn check_partial(&self, g: &Hypergraph3, stage: &'static str) -> Result<()> {
        let v = validate_tiling(g, &self.union(), false);
        if v.ok {
            Ok(())
        } else {
            Err(Error::Invariant(format!("after stage {stage}: {:?}", v.violations)))
        }
    }

    /// `Q`: a largest tiling by copies with one `Y` vertex and three `Z`
    /// vertices. Exact branch and bound when `|Y| ≤ 12`, greedy otherwise.
    pub fn build_q(&mut self, g: &Hypergraph3, budget: &SearchBudget) -> Result<()> {
        let ys = self.partition.y.clone();
        let candidates: Vec<Vec<[Vertex; 3]>> = ys.iter().map(|&y| q_candidates(g, y, &self.z_set)).collect();
        let greedy = greedy_q(&candidates, g.n());
        let chosen = if ys.len() <= EXACT_Q_LIMIT {
            let (best, complete) = exact_q(&candidates, greedy, g.n(), budget.node_limit);
            self.q_exact = complete;
            best
        } else {
            self.q_exact = false;
            greedy
        };
        for (i, zs) in chosen.iter().enumerate() {
            if let Some([a, b, c]) = zs {
                let d = g.d_copy_on(&[ys[i], *a, *b, *c]).expect("candidates span D");
                self.take(&d);
                self.q_tiling.push(d);
            }
        }
        self.q = self.q_tiling.len();
        let (q, ell) = (self.q as i64, self.ell);
        let a2k = self.params.alpha.powi(2) * self.k as f64;
        self.diag("q_at_least_ell", q >= ell, format!("q = {q}, l = {ell}"));
        self.diag(
            "q_minus_ell_range",
            q >= ell && (q - ell) as f64 <= 8.0 * a2k,
            format!("q - l = {} in [0, {:.3}]", q - ell, 8.0 * a2k),
        );
        // every leftover y sees most of X together with any free z
        let free_z = self.uncovered_z();
        let xs = self.partition.x.len() as f64;
        let need = (1.0 - self.params.alpha) * xs;
        let mut worst = usize::MAX;
        for &y in ys.iter().filter(|&&y| !self.covered_y.contains(y)) {
            for &z in &free_z {
                worst = worst.min(g.neighbors(y, z).intersection_len(&self.x_set));
            }
        }
        if worst != usize::MAX {
            self.diag(
                "yz_link_into_x",
                worst as f64 >= need,
                format!("min |N(y, z) ∩ X| = {worst}, need {need:.3}"),
            );
        }
        self.check_partial(g, "Q")
    }

    /// `R`: covers each remaining `y` with edges `{x, y, z₁}` and
    /// `{x, z₁, z₂}`; free `(z₁, z₂)` are scanned in ascending order and
    /// the smallest fitting `x` is taken.
    pub fn build_r(&mut self, g: &Hypergraph3) -> Result<()> {
        let left: Vec<Vertex> = self
            .partition
            .y
            .iter()
            .copied()
            .filter(|&y| !self.covered_y.contains(y))
            .collect();
        for y in left {
            let free_z = self.uncovered_z();
            let free_x = self.uncovered_x_set();
            let mut found = None;
            'scan: for &z1 in &free_z {
                let via_y = g.neighbors(y, z1).intersection(&free_x);
                if via_y.is_empty() {
                    continue;
                }
                for &z2 in free_z.iter().filter(|&&z| z != z1) {
                    if let Some(x) = g.neighbors(z1, z2).intersection(&via_y).first() {
                        found = Some(DCopy::from_edges([x, y, z1], [x, z1, z2])?);
                        break 'scan;
                    }
                }
            }
            let Some(d) = found else {
                return Err(Error::StageFailure {
                    stage: "R",
                    reason: format!("no copy through y = {y} with one X and two free Z vertices"),
                });
            };
            self.take(&d);
            self.r_tiling.push(d);
        }
        let k = self.k as i64;
        let (ys, q, ell) = (self.partition.y.len() as i64, self.q as i64, self.ell);
        let x_left = self.uncovered_x_set().len() as i64;
        let z_left = self.uncovered_z().len() as i64;
        self.diag(
            "x_remaining_identity",
            x_left == k - ys + (q - ell),
            format!("|X \\ X_R| = {x_left}, expected {}", k - ys + (q - ell)),
        );
        self.diag(
            "z_after_r_identity",
            z_left == 3 * (k - ys) - (q - ell),
            format!("|Z \\ Z_QR| = {z_left}, expected {}", 3 * (k - ys) - (q - ell)),
        );
        self.check_partial(g, "R")
    }

    /// `S`: exactly `q − ℓ` copies with edges `{z, z', x}` and `{z, z', x'}`.
    pub fn build_s(&mut self, g: &Hypergraph3) -> Result<()> {
        let surplus = self.q as i64 - self.ell;
        if surplus < 0 {
            return Err(Error::StageFailure {
                stage: "S",
                reason: format!("q = {} is below l = {}, the remainder cannot balance", self.q, self.ell),
            });
        }
        for i in 0..surplus {
            let free_z = self.uncovered_z();
            let free_x = self.uncovered_x_set();
            let mut found = None;
            'scan: for (a, &z) in free_z.iter().enumerate() {
                for &z2 in &free_z[a + 1..] {
                    let common = g.neighbors(z, z2).intersection(&free_x);
                    let mut xs = common.iter();
                    if let (Some(x), Some(x2)) = (xs.next(), xs.next()) {
                        found = Some(DCopy::from_edges([z, z2, x], [z, z2, x2])?);
                        break 'scan;
                    }
                }
            }
            let Some(d) = found else {
                return Err(Error::StageFailure {
                    stage: "S",
                    reason: format!("copy {} of {surplus}: no free Z pair with two free X neighbours", i + 1),
                });
            };
            self.take(&d);
            self.s_tiling.push(d);
        }
        let k = self.k as i64;
        let m = k - self.partition.y.len() as i64 - surplus;
        let x_left = self.uncovered_x_set().len() as i64;
        let z_left = self.uncovered_z().len() as i64;
        self.diag(
            "x_remaining_is_m",
            x_left == m,
            format!("|X \\ X_RS| = {x_left}, m = {m}"),
        );
        self.diag(
            "z_remaining_is_3m",
            z_left == 3 * m,
            format!("|Z \\ Z_QRS| = {z_left}, 3m = {}", 3 * m),
        );
        self.diag(
            "m_lower_bound",
            6 * m >= self.partition.z.len() as i64,
            format!("3m = {} vs |Z|/2 = {}", 3 * m, self.partition.z.len() as f64 / 2.0),
        );
        if m < 0 {
            return Err(Error::StageFailure {
                stage: "S",
                reason: format!("m = {m} is negative"),
            });
        }
        self.m = Some(m as usize);
        self.check_partial(g, "S")
    }

    /// `T`: matches the leftover `X₀` against `Z₁ ∪ Z₂ ∪ Z₃` (ascending
    /// thirds of the leftover `Z`) and returns the full tiling.
    pub fn build_t(&mut self, g: &Hypergraph3, budget: &SearchBudget) -> Result<Tiling> {
        let m = self
            .m
            .ok_or_else(|| Error::Invariant("stage T run before stage S".into()))?;
        let x0 = self.uncovered_x_set().to_vec();
        let zr = self.uncovered_z();
        if x0.len() != m || zr.len() != 3 * m {
            return Err(Error::Invariant(format!(
                "leftover sizes |X0| = {}, |Z| = {} do not match m = {m}",
                x0.len(),
                zr.len()
            )));
        }
        if m > 0 {
            let parts = [
                x0.clone(),
                zr[..m].to_vec(),
                zr[m..2 * m].to_vec(),
                zr[2 * m..].to_vec(),
            ];
            let mut edges = Vec::new();
            for &x in &parts[0] {
                for &a in &parts[1] {
                    for &b in &parts[2] {
                        for &c in &parts[3] {
                            if g.spans_d(&[x, a, b, c]) {
                                edges.push([x, a, b, c]);
                            }
                        }
                    }
                }
            }
            let h = FourPartite4Graph::new(parts, edges)?;
            let cond = matching_degree_condition(&h, 0.5);
            self.diag(
                "matching_degree_condition",
                cond.holds,
                format!("m·δ(V1) + m³·δ(V2,V3,V4) = {} vs (1 + 1/2)m⁴ = {}", cond.lhs, cond.rhs),
            );
            self.matching_condition = Some(cond);
            let res = four_partite_perfect_matching(&h, budget)?;
            self.matching_nodes = res.nodes;
            let matching = match res.outcome {
                MatchingOutcome::Matched(mm) => mm,
                MatchingOutcome::Infeasible => {
                    return Err(Error::StageFailure {
                        stage: "T",
                        reason: "the auxiliary 4-partite 4-graph has no perfect matching".into(),
                    })
                }
                MatchingOutcome::Exhausted => {
                    return Err(Error::StageFailure {
                        stage: "T",
                        reason: format!("matching search exhausted after {} nodes", res.nodes),
                    })
                }
            };
            for e in matching {
                let d = g.d_copy_on(&e).expect("matching edges span D");
                self.take(&d);
                self.t_tiling.push(d);
            }
        }
        let full = self.union().sorted();
        let v = validate_tiling(g, &full, true);
        if !v.ok {
            return Err(Error::Invariant(format!(
                "staged tiling is not perfect: {:?}",
                v.violations
            )));
        }
        Ok(full)
    }

    pub fn report(&self) -> ExtremalReport {
        ExtremalReport {
            x: self.partition.x.len(),
            y: self.partition.y.len(),
            z: self.partition.z.len(),
            alpha: self.params.alpha,
            q: self.q,
            ell: self.ell,
            m: self.m,
            q_exact: self.q_exact,
            stage_sizes: [
                self.q_tiling.len(),
                self.r_tiling.len(),
                self.s_tiling.len(),
                self.t_tiling.len(),
            ],
            matching_nodes: self.matching_nodes,
            matching_condition: self.matching_condition.clone(),
            diagnostics: self.diagnostics.clone(),
            failure: None,
        }
    }
}

/// Triples `{a, b, c} ⊆ Z` with `{y, a, b, c}` spanning D, sorted. Since
/// `Z` is D-free, each such 4-set has two edges through `y`, or one edge
/// through `y` together with the edge `{a, b, c}`.
fn q_candidates(g: &Hypergraph3, y: Vertex, z: &VertexSet) -> Vec<[Vertex; 3]> {
    let mut out = Vec::new();
    for a in z.iter() {
        let link = g.neighbors(y, a).intersection(z);
        for b in link.iter() {
            for c in link.iter().filter(|&c| c > b) {
                let mut t = [a, b, c];
                t.sort_unstable();
                out.push(t);
            }
            for c in g.neighbors(a, b).intersection(z).iter() {
                let mut t = [a, b, c];
                t.sort_unstable();
                out.push(t);
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

fn disjoint_from(t: &[Vertex; 3], used: &VertexSet) -> bool {
    t.iter().all(|&v| !used.contains(v))
}

fn greedy_q(candidates: &[Vec<[Vertex; 3]>], n: usize) -> Vec<Option<[Vertex; 3]>> {
    let mut used = VertexSet::new(n);
    candidates
        .iter()
        .map(|cs| {
            let pick = cs.iter().find(|t| disjoint_from(t, &used)).copied();
            if let Some(t) = pick {
                t.iter().for_each(|&v| {
                    used.insert(v);
                });
            }
            pick
        })
        .collect()
}

fn count(sel: &[Option<[Vertex; 3]>]) -> usize {
    sel.iter().filter(|s| s.is_some()).count()
}

/// Branch and bound over `y` in order: give it a candidate or leave it out.
/// Returns the best selection and whether the search finished.
fn exact_q(
    candidates: &[Vec<[Vertex; 3]>],
    incumbent: Vec<Option<[Vertex; 3]>>,
    n: usize,
    node_limit: u64,
) -> (Vec<Option<[Vertex; 3]>>, bool) {
    struct St<'a> {
        cands: &'a [Vec<[Vertex; 3]>],
        best: Vec<Option<[Vertex; 3]>>,
        best_count: usize,
        cur: Vec<Option<[Vertex; 3]>>,
        nodes: u64,
        limit: u64,
    }
    fn rec(st: &mut St, i: usize, used: &mut VertexSet, have: usize) {
        if st.nodes >= st.limit {
            return;
        }
        st.nodes += 1;
        let left = st.cands.len() - i;
        if have + left <= st.best_count {
            return;
        }
        if i == st.cands.len() {
            st.best = st.cur.clone();
            st.best_count = have;
            return;
        }
        for t in &st.cands[i] {
            if !disjoint_from(t, used) {
                continue;
            }
            t.iter().for_each(|&v| {
                used.insert(v);
            });
            st.cur.push(Some(*t));
            rec(st, i + 1, used, have + 1);
            st.cur.pop();
            t.iter().for_each(|&v| {
                used.remove(v);
            });
            if st.nodes >= st.limit || have + left <= st.best_count {
                return;
            }
        }
        st.cur.push(None);
        rec(st, i + 1, used, have);
        st.cur.pop();
    }
    let best_count = count(&incumbent);
    let mut st = St {
        cands: candidates,
        best: incumbent,
        best_count,
        cur: Vec::new(),
        nodes: 0,
        limit: node_limit,
    };
    rec(&mut st, 0, &mut VertexSet::new(n), 0);
    let complete = st.nodes < st.limit;
    (st.best, complete)
}

/// JSON-friendly summary of a staged run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtremalReport {
    pub x: usize,
    pub y: usize,
    pub z: usize,
    pub alpha: f64,
    pub q: usize,
    pub ell: i64,
    pub m: Option<usize>,
    pub q_exact: bool,
    /// Sizes of `Q`, `R`, `S`, `T`.
    pub stage_sizes: [usize; 4],
    pub matching_nodes: u64,
    pub matching_condition: Option<MatchingDegreeCondition>,
    pub diagnostics: Vec<Diagnostic>,
    pub failure: Option<String>,
}

#[derive(Clone, Debug)]
pub struct ExtremalRun {
    pub report: ExtremalReport,
    pub result: Result<Tiling>,
}

/// Runs every stage from a D-free seed set `s0`, which is first extended to
/// a maximal one. Failures are recorded in the report and returned in
/// `result`; input errors are returned directly.
pub fn run_extremal(
    g: &Hypergraph3,
    s0: &VertexSet,
    params: &ExtremalParams,
    budget: &SearchBudget,
) -> Result<ExtremalRun> {
    if !g.n().is_multiple_of(4) {
        return input(format!("the staged tiling needs n divisible by 4, got {}", g.n()));
    }
    let z = extend_to_maximal_d_free(g, s0)?;
    let (partition, diags) = partition_xyz(g, &z, params)?;
    let mut st = PipelineState::new(g, partition, *params, diags)?;
    let result = st
        .build_q(g, budget)
        .and_then(|_| st.build_r(g))
        .and_then(|_| st.build_s(g))
        .and_then(|_| st.build_t(g, budget));
    let mut report = st.report();
    if let Err(e) = &result {
        report.failure = Some(e.to_string());
    }
    Ok(ExtremalRun { report, result })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{complete_3graph, construct_g0, planted_extremal};

    fn set(n: usize, vs: impl IntoIterator<Item = usize>) -> VertexSet {
        VertexSet::from_iter_in(n, vs)
    }

    #[test]
    fn maximal_extension() {
        let g = planted_extremal(8).unwrap();
        assert_eq!(
            extend_to_maximal_d_free(&g, &set(8, 2..8)).unwrap().to_vec(),
            (2..8).collect::<Vec<_>>()
        );
        assert_eq!(
            extend_to_maximal_d_free(&Hypergraph3::empty(8), &set(8, []))
                .unwrap()
                .len(),
            8
        );
        let k8 = complete_3graph(8).unwrap();
        assert_eq!(extend_to_maximal_d_free(&k8, &set(8, [0, 1, 2])).unwrap().len(), 3);
        assert!(extend_to_maximal_d_free(&k8, &set(8, [0, 1, 2, 3])).is_err());
    }

    #[test]
    fn partitions() {
        let p = ExtremalParams::default();
        let g = planted_extremal(8).unwrap();
        let (part, _) = partition_xyz(&g, &set(8, 2..8), &p).unwrap();
        assert_eq!((part.x, part.y), (vec![0, 1], vec![]));
        let g0 = construct_g0(8).unwrap();
        let (part, _) = partition_xyz(&g0, &set(8, 1..8), &p).unwrap();
        assert_eq!((part.x, part.y), (vec![0], vec![]));
        let e = Hypergraph3::empty(5);
        let (part, _) = partition_xyz(&e, &set(5, 0..5), &p).unwrap();
        assert!(part.x.is_empty() && part.y.is_empty());
        assert!(partition_xyz(&g, &set(8, 2..8), &ExtremalParams::with_alpha(1.0)).is_err());
        assert!(partition_xyz(&g, &set(8, 3..8), &p).is_err());
    }

    #[test]
    fn planted_runs_through_t_only() {
        for n in [8, 16] {
            let g = planted_extremal(n).unwrap();
            let run = run_extremal(
                &g,
                &set(n, n / 4..n),
                &ExtremalParams::default(),
                &SearchBudget::default(),
            )
            .unwrap();
            let t = run.result.unwrap();
            assert_eq!(t.len(), n / 4);
            assert_eq!(run.report.stage_sizes, [0, 0, 0, n / 4]);
            assert_eq!(run.report.m, Some(n / 4));
            assert!(run
                .report
                .diagnostics
                .iter()
                .filter(|d| d.name.ends_with("is_m") || d.name.ends_with("3m"))
                .all(|d| d.holds));
        }
    }

    /// X = {0, 1, 2} complete; y-vertices 3 and 4 both only fit Z-triple
    /// {5, 6, 7}, so one goes to Q and the other needs R; q − l = 1 forces
    /// one S copy and leaves m = 0.
    #[test]
    fn q_r_s_shapes() {
        let n = 12;
        let mut triples = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    if a < 3 {
                        triples.push([a, b, c]);
                    }
                }
            }
        }
        triples.extend([[3, 5, 6], [3, 5, 7], [4, 5, 6], [4, 5, 7]]);
        let g = Hypergraph3::build(n, triples).unwrap();
        let z = set(n, 5..12);
        let (part, diags) = partition_xyz(&g, &z, &ExtremalParams::default()).unwrap();
        assert_eq!((part.x.clone(), part.y.clone()), (vec![0, 1, 2], vec![3, 4]));
        let mut st = PipelineState::new(&g, part, ExtremalParams::default(), diags).unwrap();
        st.build_q(&g, &SearchBudget::default()).unwrap();
        assert_eq!((st.q, st.ell, st.q_exact), (1, 0, true));
        assert_eq!(st.q_tiling.copies()[0].vertices(), [3, 5, 6, 7]);
        st.build_r(&g).unwrap();
        assert_eq!(
            st.r_tiling.copies(),
            &[DCopy::from_edges([0, 4, 8], [0, 8, 9]).unwrap()]
        );
        st.build_s(&g).unwrap();
        assert_eq!(
            st.s_tiling.copies(),
            &[DCopy::from_edges([10, 11, 1], [10, 11, 2]).unwrap()]
        );
        assert_eq!(st.m, Some(0));
        let t = st.build_t(&g, &SearchBudget::default()).unwrap();
        assert_eq!(t.len(), 3);
        assert!(st.t_tiling.is_empty());
    }

    #[test]
    fn stage_failure_when_q_short() {
        // G0: X = {0}, l = 1 but Y is empty, so q = 0 < l
        let g = construct_g0(8).unwrap();
        let run = run_extremal(&g, &set(8, 1..8), &ExtremalParams::default(), &SearchBudget::default()).unwrap();
        assert!(matches!(run.result, Err(Error::StageFailure { stage: "S", .. })));
        assert!(run.report.failure.is_some());
        assert!(run
            .report
            .diagnostics
            .iter()
            .any(|d| d.name == "q_at_least_ell" && !d.holds));
    }
}
