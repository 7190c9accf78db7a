//! Absorbing 8-sets and absorbing families.
//!
//! An 8-set `S` absorbs a 4-set `U` (disjoint from it) when both `G[S]` and
//! `G[S ∪ U]` have perfect D-tilings. A family of pairwise disjoint
//! absorbing 8-sets with union `A` lets a small leftover `W` be swallowed:
//! each 4-block of `W` is paired with its own absorbing member.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::bitset::VertexSet;
use crate::error::{input, Error, Result};
use crate::exact::{perfect_tiling_on, PerfectOutcome, SearchBudget};
use crate::format::write_certificate;
use crate::hypergraph::{validate_tiling, Hypergraph3, Tiling, Vertex};
use crate::rng::{derive_seed, seeded, DetRng};

pub type Octet = [Vertex; 8];
pub type Quartet = [Vertex; 4];

fn tiling_of(g: &Hypergraph3, vertices: &[Vertex]) -> Result<Option<Tiling>> {
    Ok(match perfect_tiling_on(g, vertices, &SearchBudget::default())? {
        PerfectOutcome::Tiled(t) => Some(t),
        _ => None,
    })
}

fn check_shapes(g: &Hypergraph3, s: &[Vertex], u: &[Vertex]) -> Result<()> {
    let mut all: Vec<Vertex> = s.iter().chain(u).copied().collect();
    all.sort_unstable();
    if all.windows(2).any(|w| w[0] == w[1]) {
        return input(format!(
            "absorber {s:?} and 4-set {u:?} must be disjoint sets of distinct vertices"
        ));
    }
    if all.last().is_some_and(|&v| v >= g.n()) {
        return input(format!("vertex outside 0..{}", g.n()));
    }
    Ok(())
}

/// Whether `s` absorbs `u`: both `G[S]` and `G[S ∪ U]` are perfectly
/// D-tileable.
pub fn absorbs(g: &Hypergraph3, s: &Octet, u: &Quartet) -> Result<bool> {
    check_shapes(g, s, u)?;
    if tiling_of(g, s)?.is_none() {
        return Ok(false);
    }
    let union: Vec<Vertex> = s.iter().chain(u).copied().collect();
    Ok(tiling_of(g, &union)?.is_some())
}

/// Every 8-set of `V \ U` absorbing `u`, in lexicographic order. Only for
/// small `n`.
pub fn absorbers_exhaustive(g: &Hypergraph3, u: &Quartet) -> Result<Vec<Octet>> {
    let rest: Vec<Vertex> = (0..g.n()).filter(|v| !u.contains(v)).collect();
    if rest.len() > 20 {
        return input(format!(
            "exhaustive absorber scan is limited to n <= 24, got n = {}",
            g.n()
        ));
    }
    let mut out = Vec::new();
    let k = rest.len();
    let mut idx: Vec<usize> = (0..8).collect();
    if k < 8 {
        return Ok(out);
    }
    loop {
        let s: Octet = std::array::from_fn(|i| rest[idx[i]]);
        if absorbs(g, &s, u)? {
            out.push(s);
        }
        // next combination
        let mut i = 8;
        while i > 0 && idx[i - 1] == k - 8 + i - 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        idx[i - 1] += 1;
        for j in i..8 {
            idx[j] = idx[j - 1] + 1;
        }
    }
    Ok(out)
}

/// Node cap for the pattern search in [`find_absorber_gadget`].
const GADGET_NODE_LIMIT: u64 = 2_000_000;

/// Builds an absorber for `u = {u₁, u₂, u₃, u₄}` around the pairs
/// `{u₁, u₂}` and `{u₃, u₄}`.
///
/// First looks for a `K³₃,₃,₃` in `G[W₁, W₂, W₃]`, where `W₁ ⊆ N(u₁, u₂)`
/// and `W₂ ⊆ N(u₃, u₄)` are random subsets of size `⌈δ₂/3⌉` and `W₃` is the
/// joint neighbourhood of `V₁ × V₂` outside them; dropping one `W₃` vertex
/// of the copy leaves an absorber. If no copy turns up, searches directly
/// for the ten edges such an absorber actually uses. Every result is
/// re-verified with [`absorbs`].
pub fn find_absorber_gadget(g: &Hypergraph3, u: &Quartet, seed: u64) -> Result<Option<Octet>> {
    check_shapes(g, &[], u)?;
    let n = g.n();
    let mut rng = seeded(seed);
    let [u1, u2, u3, u4] = *u;
    let uset = VertexSet::from_iter_in(n, u.iter().copied());
    let v1 = g.neighbors(u1, u2).difference(&uset);
    let v2 = g.neighbors(u3, u4).difference(&uset);
    if v1.len() < 2 || v2.len() < 2 {
        return Ok(None);
    }
    let size = g.min_codegree().div_ceil(3).max(3);
    let mut pool1 = v1.to_vec();
    pool1.shuffle(&mut rng);
    pool1.truncate(size);
    let w1 = VertexSet::from_iter_in(n, pool1);
    let mut pool2 = v2.difference(&w1).to_vec();
    pool2.shuffle(&mut rng);
    pool2.truncate(size);
    let w2 = VertexSet::from_iter_in(n, pool2);
    let mut w3 = VertexSet::new(n);
    for a in v1.iter() {
        for b in v2.iter().filter(|&b| b != a) {
            w3.union_with(g.neighbors(a, b));
        }
    }
    w3.difference_with(&w1);
    w3.difference_with(&w2);
    w3.difference_with(&uset);

    let candidate = k333(g, &w1, &w2, &w3, &mut rng)
        .map(|(a, b, c)| {
            // the copy minus the pivot c[0]
            let mut s = [a[0], a[1], a[2], b[0], b[1], b[2], c[1], c[2]];
            s.sort_unstable();
            s
        })
        .or_else(|| pattern_gadget(g, u, &v1, &v2));
    match candidate {
        Some(s) if absorbs(g, &s, u)? => Ok(Some(s)),
        Some(s) => Err(Error::Invariant(format!("gadget {s:?} does not absorb {u:?}"))),
        None => Ok(None),
    }
}

/// A `K³₃,₃,₃` with parts in `w1`, `w2`, `w3`: random pivots in `w1`, then
/// exhaustive extension through common neighbourhoods.
fn k333(
    g: &Hypergraph3,
    w1: &VertexSet,
    w2: &VertexSet,
    w3: &VertexSet,
    rng: &mut DetRng,
) -> Option<([Vertex; 3], [Vertex; 3], [Vertex; 3])> {
    let mut a_list = w1.to_vec();
    a_list.shuffle(rng);
    let b_list = w2.to_vec();
    for (ai, &a0) in a_list.iter().enumerate() {
        for (i, &a1) in a_list.iter().enumerate().skip(ai + 1) {
            for &a2 in &a_list[i + 1..] {
                // for each b, the W3 vertices completing all three a's
                let c_of: Vec<(Vertex, VertexSet)> = b_list
                    .iter()
                    .map(|&b| {
                        let mut c = g.neighbors(a0, b).intersection(w3);
                        c.intersect_with(g.neighbors(a1, b));
                        c.intersect_with(g.neighbors(a2, b));
                        (b, c)
                    })
                    .filter(|(_, c)| c.len() >= 3)
                    .collect();
                for (x, (b0, c0)) in c_of.iter().enumerate() {
                    for (y, (b1, c1)) in c_of.iter().enumerate().skip(x + 1) {
                        let c01 = c0.intersection(c1);
                        if c01.len() < 3 {
                            continue;
                        }
                        for (b2, c2) in &c_of[y + 1..] {
                            let c = c01.intersection(c2);
                            if c.len() >= 3 {
                                let cs = c.to_vec();
                                let mut a = [a0, a1, a2];
                                a.sort_unstable();
                                return Some((a, [*b0, *b1, *b2], [cs[0], cs[1], cs[2]]));
                            }
                        }
                    }
                }
            }
        }
    }
    None
}

/// Searches directly for the edges
/// `{w₁, w₂, w₃'}, {w₁', w₂, w₃'}, {w₁'', w₂', w₃''}, {w₁'', w₂'', w₃''},
/// {w₁'', w₂'', w₃'}` with `w₁, w₁' ∈ N(u₁, u₂)` and `w₂, w₂' ∈ N(u₃, u₄)`.
fn pattern_gadget(g: &Hypergraph3, u: &Quartet, v1: &VertexSet, v2: &VertexSet) -> Option<Octet> {
    let n = g.n();
    let mut nodes = 0u64;
    let free = |used: &[Vertex], v: Vertex| !u.contains(&v) && !used.contains(&v);
    for w3a in (0..n).filter(|&v| free(&[], v)) {
        for w2 in v2.iter().filter(|&v| v != w3a) {
            let c = g.neighbors(w2, w3a).intersection(v1).to_vec();
            for (i, &w1) in c.iter().enumerate() {
                for &w1b in &c[i + 1..] {
                    let used = [w3a, w2, w1, w1b];
                    for w1c in (0..n).filter(|&v| free(&used, v)) {
                        for w2c in g.neighbors(w1c, w3a).iter().filter(|&v| free(&used, v)) {
                            for w3b in g.neighbors(w1c, w2c).iter().filter(|&v| free(&used, v)) {
                                nodes += 1;
                                if nodes > GADGET_NODE_LIMIT {
                                    return None;
                                }
                                let used2 = [w3a, w2, w1, w1b, w1c, w2c, w3b];
                                let w2b = g.neighbors(w1c, w3b).intersection(v2).iter().find(|&v| free(&used2, v));
                                if let Some(w2b) = w2b {
                                    let mut s = [w1, w1b, w1c, w2, w2b, w2c, w3a, w3b];
                                    s.sort_unstable();
                                    return Some(s);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbsorptionParams {
    /// Bound on `|A| / n`.
    pub alpha: f64,
    /// Absorber density; estimated by sampling when `None`.
    pub sigma: Option<f64>,
    /// Sampling rate per 8-set; derived from `alpha` and `sigma` when `None`.
    pub p: Option<f64>,
    /// Minimum codegree ratio expected of the host graph (warning only).
    pub delta: f64,
    pub seed: u64,
    pub max_retries: usize,
    /// Random 4-sets tried per member when checking it absorbs something.
    pub probes: usize,
    /// Check members against every 4-set instead of a probe (n ≤ 30).
    pub strict: bool,
}

impl Default for AbsorptionParams {
    fn default() -> Self {
        AbsorptionParams {
            alpha: 0.3,
            sigma: None,
            p: None,
            delta: 0.25,
            seed: 0,
            max_retries: 200,
            probes: 500,
            strict: false,
        }
    }
}

/// Pairs sampled when estimating the absorber density.
pub const SIGMA_SAMPLES: usize = 200;
pub const SIGMA_FLOOR: f64 = 1e-3;

fn binomial(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn random_subset<const K: usize>(rng: &mut DetRng, n: usize) -> [Vertex; K] {
    let mut s: [Vertex; K] = [0; K];
    for (slot, v) in s.iter_mut().zip(sample(rng, n, K)) {
        *slot = v;
    }
    s.sort_unstable();
    s
}

/// Fraction of random disjoint `(U, S)` pairs with `S` absorbing `U`,
/// floored at [`SIGMA_FLOOR`].
pub fn estimate_sigma(g: &Hypergraph3, samples: usize, seed: u64) -> Result<f64> {
    let n = g.n();
    if n < 12 {
        return input(format!("absorber density needs n >= 12, got {n}"));
    }
    let mut rng = seeded(seed);
    let mut hits = 0;
    for _ in 0..samples {
        let pick: [Vertex; 12] = {
            let mut p = [0; 12];
            for (slot, v) in p.iter_mut().zip(sample(&mut rng, n, 12)) {
                *slot = v;
            }
            p
        };
        let mut u: Quartet = pick[..4].try_into().unwrap();
        let mut s: Octet = pick[4..].try_into().unwrap();
        u.sort_unstable();
        s.sort_unstable();
        if absorbs(g, &s, &u)? {
            hits += 1;
        }
    }
    Ok((hits as f64 / samples.max(1) as f64).max(SIGMA_FLOOR))
}

/// Sampling rate with expected sample size `alpha·sigma·n/16`.
pub fn default_rate(n: usize, alpha: f64, sigma: f64) -> f64 {
    (alpha * sigma * n as f64 / 16.0 / binomial(n as u64, 8)).min(1.0)
}

/// Leftover bound parameter `omega = alpha·sigma²/128`.
pub fn omega(alpha: f64, sigma: f64) -> f64 {
    alpha * sigma * sigma / 128.0
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FamilyStats {
    pub attempts: usize,
    pub sampled: usize,
    pub after_overlap_deletion: usize,
    pub after_absorb_deletion: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbsorberFamily {
    members: Vec<Octet>,
    tilings: Vec<Tiling>,
    union: Vec<Vertex>,
    pub alpha: f64,
    pub sigma: f64,
    pub p: f64,
    pub omega: f64,
    pub seed: u64,
    pub stats: FamilyStats,
}

impl AbsorberFamily {
    pub fn members(&self) -> &[Octet] {
        &self.members
    }

    /// Cached perfect tiling of `G[members[i]]`.
    pub fn tiling(&self, i: usize) -> &Tiling {
        &self.tilings[i]
    }

    /// The union `A` of all members, sorted.
    pub fn union(&self) -> &[Vertex] {
        &self.union
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Members absorbing `u`, in member order.
    pub fn absorbers_of(&self, g: &Hypergraph3, u: &Quartet) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for (i, s) in self.members.iter().enumerate() {
            if absorbs(g, s, u)? {
                out.push(i);
            }
        }
        Ok(out)
    }

    /// Re-checks disjointness, the size bound and every cached tiling.
    pub fn check(&self, g: &Hypergraph3) -> Result<()> {
        let mut seen = VertexSet::new(g.n());
        for (i, s) in self.members.iter().enumerate() {
            for &v in s {
                if v >= g.n() || !seen.insert(v) {
                    return Err(Error::Invariant(format!("member {i} overlaps another or leaves 0..n")));
                }
            }
            let t = &self.tilings[i];
            let mut covered = t.covered();
            covered.sort_unstable();
            if covered != s.to_vec() || !validate_tiling(g, t, false).ok {
                return Err(Error::Invariant(format!(
                    "cached tiling of member {i} is not a perfect tiling of it"
                )));
            }
        }
        if self.union != seen.to_vec() {
            return Err(Error::Invariant("stored union differs from the members".into()));
        }
        if self.union.len() as f64 > self.alpha * g.n() as f64 {
            return Err(Error::Invariant(format!(
                "|A| = {} exceeds alpha·n = {}",
                self.union.len(),
                self.alpha * g.n() as f64
            )));
        }
        Ok(())
    }

    /// Text dump: header `family m alpha sigma seed`, one line per member,
    /// then each member's tiling as a certificate.
    pub fn dump(&self, n: usize) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "family {} {} {} {}",
            self.members.len(),
            self.alpha,
            self.sigma,
            self.seed
        );
        for s in &self.members {
            let line: Vec<String> = s.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        for t in &self.tilings {
            out.push_str(&write_certificate(t, n));
        }
        out
    }
}

/// Samples 8-sets, deletes overlapping ones and those that are not
/// D-tileable or absorb no probe 4-set, and retries until the family is
/// nonempty with `|A| ≤ alpha·n`.
pub fn build_absorbing_family(g: &Hypergraph3, params: &AbsorptionParams) -> Result<AbsorberFamily> {
    let n = g.n();
    if !(params.alpha > 0.0 && params.alpha < 1.0) {
        return input(format!("alpha must lie in (0, 1), got {}", params.alpha));
    }
    if params.max_retries == 0 {
        return input("max_retries must be at least 1");
    }
    if n < 12 {
        return input(format!("absorbing families need n >= 12, got {n}"));
    }
    if params.strict && n > 30 {
        return input(format!("strict absorber checks are limited to n <= 30, got {n}"));
    }
    if (g.min_codegree() as f64) < params.delta * n as f64 {
        log::warn!(
            "min codegree {} is below delta·n = {:.1}; absorbers may be scarce",
            g.min_codegree(),
            params.delta * n as f64
        );
    }
    let sigma = match params.sigma {
        Some(s) => s,
        None => estimate_sigma(g, SIGMA_SAMPLES, derive_seed(params.seed, 0x5167))?,
    };
    let p = params.p.unwrap_or_else(|| default_rate(n, params.alpha, sigma));
    if !(0.0..=1.0).contains(&p) {
        return input(format!("sampling rate must lie in [0, 1], got {p}"));
    }
    let total = binomial(n as u64, 8);
    let mut stats = FamilyStats::default();
    let mut last_reason = String::new();
    for attempt in 0..params.max_retries {
        stats.attempts = attempt + 1;
        let mut rng = seeded(derive_seed(params.seed, attempt as u64 + 1));
        let count = Binomial::new(total as u64, p)
            .map_err(|e| Error::Input(format!("bad sampling rate {p}: {e}")))?
            .sample(&mut rng) as usize;
        let mut sampled = BTreeSet::new();
        while sampled.len() < count {
            sampled.insert(random_subset::<8>(&mut rng, n));
        }
        stats.sampled = sampled.len();

        // (a) drop every set meeting another
        let mut hits = vec![0u32; n];
        for s in &sampled {
            for &v in s {
                hits[v] += 1;
            }
        }
        let isolated: Vec<Octet> = sampled
            .into_iter()
            .filter(|s| s.iter().all(|&v| hits[v] == 1))
            .collect();
        stats.after_overlap_deletion = isolated.len();

        // (b) keep tileable sets absorbing some probe 4-set
        let probes = probe_sets(n, params, &mut rng);
        let mut members = Vec::new();
        let mut tilings = Vec::new();
        for s in isolated {
            let Some(t) = tiling_of(g, &s)? else { continue };
            let mut absorbs_one = false;
            for u in probes.iter().filter(|u| u.iter().all(|v| !s.contains(v))) {
                if absorbs(g, &s, u)? {
                    absorbs_one = true;
                    break;
                }
            }
            if absorbs_one {
                members.push(s);
                tilings.push(t);
            }
        }
        stats.after_absorb_deletion = members.len();

        let size = 8 * members.len();
        if members.is_empty() {
            last_reason = format!("empty family ({} sampled)", stats.sampled);
            continue;
        }
        if size as f64 > params.alpha * n as f64 {
            last_reason = format!("|A| = {size} exceeds alpha·n = {:.1}", params.alpha * n as f64);
            continue;
        }
        let mut union: Vec<Vertex> = members.iter().flatten().copied().collect();
        union.sort_unstable();
        let fam = AbsorberFamily {
            members,
            tilings,
            union,
            alpha: params.alpha,
            sigma,
            p,
            omega: omega(params.alpha, sigma),
            seed: params.seed,
            stats,
        };
        fam.check(g)?;
        return Ok(fam);
    }
    Err(Error::Construction {
        attempts: params.max_retries,
        reason: format!("{last_reason}; sigma = {sigma}, p = {p:e}"),
    })
}

fn probe_sets(n: usize, params: &AbsorptionParams, rng: &mut DetRng) -> Vec<Quartet> {
    if params.strict {
        let mut all = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    for d in c + 1..n {
                        all.push([a, b, c, d]);
                    }
                }
            }
        }
        return all;
    }
    let k = (binomial(n as u64, 4) as usize).min(params.probes);
    (0..k).map(|_| random_subset::<4>(rng, n)).collect()
}

/// Tiles `G[A ∪ W]`: `W` is cut into ascending 4-blocks, each block takes
/// the first unused member absorbing it, and unused members keep their
/// cached tilings.
pub fn absorb_leftover(g: &Hypergraph3, family: &AbsorberFamily, w: &[Vertex]) -> Result<Tiling> {
    let n = g.n();
    let a = VertexSet::from_iter_in(n, family.union().iter().copied());
    let mut ws = w.to_vec();
    ws.sort_unstable();
    ws.dedup();
    if ws.len() != w.len() || ws.iter().any(|&v| v >= n || a.contains(v)) {
        return input("leftover must be distinct vertices outside the absorbing set");
    }
    if !(ws.len() + a.len()).is_multiple_of(4) {
        return input(format!("|A ∪ W| = {} is not divisible by 4", ws.len() + a.len()));
    }
    if ws.len() as f64 > family.omega * n as f64 {
        log::warn!(
            "leftover of {} vertices exceeds omega·n = {:.3}; absorption is not guaranteed",
            ws.len(),
            family.omega * n as f64
        );
    }
    let mut used = vec![false; family.len()];
    let mut out = Tiling::default();
    for chunk in ws.chunks(4) {
        let u: Quartet = chunk.try_into().expect("length divisible by 4");
        let mut done = false;
        for (i, s) in family.members().iter().enumerate() {
            if used[i] || !absorbs(g, s, &u)? {
                continue;
            }
            let union: Vec<Vertex> = s.iter().chain(&u).copied().collect();
            let t = tiling_of(g, &union)?.expect("absorbs implies tileable");
            out.extend(t);
            used[i] = true;
            done = true;
            break;
        }
        if !done {
            return Err(Error::Absorption { chunk: u });
        }
    }
    for (i, flag) in used.iter().enumerate() {
        if !flag {
            out.extend(family.tiling(i).clone());
        }
    }
    let out = out.sorted();
    let sub: Vec<Vertex> = a.iter().chain(ws.iter().copied()).collect();
    let mut covered = out.covered();
    let mut expect = sub;
    expect.sort_unstable();
    covered.sort_unstable();
    if covered != expect || !validate_tiling(g, &out, false).ok {
        return Err(Error::Invariant("absorbed tiling does not cover A ∪ W exactly".into()));
    }
    Ok(out)
}
