//! End-to-end solver: look for a large D-free set, then take the staged
//! extremal route or the absorbing route, and fall back to exact search
//! when either stalls.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::absorption::{absorb_leftover, build_absorbing_family, AbsorptionParams, FamilyStats};
use crate::almost_perfect::{near_perfect_tiling, NearPerfectConfig, NearPerfectReport};
use crate::bitset::VertexSet;
use crate::error::{input, Result};
use crate::exact::{
    bounding_d_free, max_d_free_set, perfect_tiling_exact, perfect_tiling_on, PerfectOutcome, SearchBudget,
};
use crate::extremal::{extend_to_maximal_d_free, run_extremal, ExtremalParams, ExtremalReport};
use crate::hypergraph::{validate_tiling, Hypergraph3, Tiling, Verdict, Vertex};
use crate::rng::derive_seed;

/// Largest `n` for which the extremality check uses the exact maximum
/// D-free set.
pub const EXACT_CERTIFICATE_LIMIT: usize = 24;
/// Largest `|A ∪ W|` that is re-tiled exactly when greedy absorption fails.
pub const EXACT_REPAIR_LIMIT: usize = 40;

/// `eps` installed by [`DriverParams::with_asymptotic_constants`].
pub const ASYMPTOTIC_EPS0: f64 = 1e-18;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Auto,
    Extremal,
    Absorb,
    Exact,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriverParams {
    pub mode: Mode,
    /// Link threshold of the staged route and `|A|/n` bound of the
    /// absorbing route.
    pub alpha: f64,
    pub gamma: f64,
    /// The graph counts as extremal when it has a D-free set of size at
    /// least `(1 − eps)·3n/4`.
    pub eps: f64,
    pub seed: u64,
    pub budget: SearchBudget,
    /// Check absorbers against every 4-set (small `n` only).
    pub strict: bool,
    /// Route failures to the exact solver.
    pub fallback: bool,
    /// Local-search restarts, each leaving a different leftover to absorb.
    pub restarts: usize,
    /// Record wall-clock timings; off by default so reports are
    /// reproducible byte for byte.
    pub timings: bool,
}

impl Default for DriverParams {
    fn default() -> Self {
        DriverParams {
            mode: Mode::Auto,
            alpha: 0.3,
            gamma: 0.1,
            eps: 0.25,
            seed: 0,
            budget: SearchBudget::default(),
            strict: false,
            fallback: true,
            restarts: 8,
            timings: false,
        }
    }
}

impl DriverParams {
    /// `eps = 10⁻¹⁸` and `alpha = eps^{1/3}`; at any feasible `n` the
    /// extremal test then needs a D-free set of essentially `3n/4`.
    pub fn with_asymptotic_constants(mut self) -> Self {
        self.eps = ASYMPTOTIC_EPS0;
        self.alpha = ASYMPTOTIC_EPS0.cbrt();
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Extremal,
    NonExtremal,
    ExactFallback,
    Exact,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Tiled,
    /// Exact search exhausted the tree: no perfect tiling exists.
    Infeasible,
    /// Exact search ran out of budget.
    Exhausted,
    /// A constructive branch failed and fallback was disabled.
    Stalled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtremalityCheck {
    /// `max_d_free_set` or `greedy`.
    pub method: String,
    pub size: usize,
    pub optimal: bool,
    pub threshold: f64,
    pub extremal: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbsorptionReport {
    pub family_size: usize,
    pub absorbing_set: usize,
    pub sigma: f64,
    pub p: f64,
    pub omega: f64,
    pub family_stats: FamilyStats,
    /// Local-search runs tried.
    pub attempts: usize,
    /// Report of the last local-search run.
    pub near_perfect: Option<NearPerfectReport>,
    pub leftover: Option<usize>,
    /// `absorbers` (greedy matching of leftover blocks to members) or
    /// `exact` (exact tiling of `G[A ∪ W]`).
    pub leftover_method: Option<String>,
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub n: usize,
    pub edges: usize,
    pub min_codegree: usize,
    pub mode: Mode,
    pub seed: u64,
    pub branch: Branch,
    pub status: Status,
    pub extremality: Option<ExtremalityCheck>,
    pub extremal: Option<ExtremalReport>,
    pub absorption: Option<AbsorptionReport>,
    pub fallback_reason: Option<String>,
    pub exact_nodes: Option<u64>,
    pub verdict: Option<Verdict>,
    pub warnings: Vec<String>,
    pub timings_ms: Option<BTreeMap<String, f64>>,
}

#[derive(Clone, Debug)]
pub struct Solved {
    pub tiling: Option<Tiling>,
    pub report: RunReport,
}

struct Clock {
    on: bool,
    marks: BTreeMap<String, f64>,
}

impl Clock {
    fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        if self.on {
            *self.marks.entry(stage.to_string()).or_default() += start.elapsed().as_secs_f64() * 1e3;
        }
        out
    }
}

/// Looks for a large D-free set: exact for small `n`, otherwise the best
/// greedy set extended to a maximal one.
pub fn extremality_check(g: &Hypergraph3, eps: f64, budget: &SearchBudget) -> Result<(ExtremalityCheck, VertexSet)> {
    let n = g.n();
    let (method, set, optimal) = if n <= EXACT_CERTIFICATE_LIMIT {
        let r = max_d_free_set(g, budget)?;
        ("max_d_free_set", VertexSet::from_iter_in(n, r.value), r.optimal)
    } else {
        ("greedy", extend_to_maximal_d_free(g, &bounding_d_free(g))?, false)
    };
    let threshold = (1.0 - eps) * 3.0 * n as f64 / 4.0;
    Ok((
        ExtremalityCheck {
            method: method.to_string(),
            size: set.len(),
            optimal,
            threshold,
            extremal: set.len() as f64 >= threshold,
        },
        set,
    ))
}

/// Solves `g` end to end and validates any tiling it returns.
pub fn solve_driver(g: &Hypergraph3, params: &DriverParams) -> Result<Solved> {
    let n = g.n();
    if !n.is_multiple_of(4) {
        return input(format!("a perfect D-tiling needs n divisible by 4, got {n}"));
    }
    if !(params.eps > 0.0 && params.eps < 1.0) {
        return input(format!("eps must lie in (0, 1), got {}", params.eps));
    }
    let mut clock = Clock {
        on: params.timings,
        marks: BTreeMap::new(),
    };
    let mut report = RunReport {
        n,
        edges: g.edge_count(),
        min_codegree: g.min_codegree(),
        mode: params.mode,
        seed: params.seed,
        branch: Branch::Exact,
        status: Status::Stalled,
        extremality: None,
        extremal: None,
        absorption: None,
        fallback_reason: None,
        exact_nodes: None,
        verdict: None,
        warnings: Vec::new(),
        timings_ms: None,
    };
    if (g.min_codegree() as f64) < n as f64 / 4.0 {
        report
            .warnings
            .push(format!("min codegree {} is below n/4 = {}", g.min_codegree(), n / 4));
    }
    if params.eps < 1e-6 && n < 1_000_000 {
        report
            .warnings
            .push("eps is far below 1/n: only a D-free set of size 3n/4 counts as extremal".into());
    }

    let mut tiling = None;
    let mut failure = None;
    if params.mode != Mode::Exact {
        let (check, set) = clock.time("extremality", || extremality_check(g, params.eps, &params.budget))?;
        let take_extremal = match params.mode {
            Mode::Extremal => true,
            Mode::Absorb => false,
            _ => check.extremal,
        };
        report.extremality = Some(check);
        if take_extremal {
            report.branch = Branch::Extremal;
            let xp = ExtremalParams {
                alpha: params.alpha,
                eps0: if params.eps < 1e-6 {
                    params.eps
                } else {
                    params.alpha.powi(3)
                },
            };
            let run = clock.time("extremal", || run_extremal(g, &set, &xp, &params.budget))?;
            report.extremal = Some(run.report);
            match run.result {
                Ok(t) => tiling = Some(t),
                Err(e) => failure = Some(e.to_string()),
            }
        } else {
            report.branch = Branch::NonExtremal;
            let (t, rep) = clock.time("absorption", || absorbing_route(g, params))?;
            failure = rep.failure.clone();
            report.absorption = Some(rep);
            tiling = t;
        }
    }

    if tiling.is_some() {
        report.status = Status::Tiled;
    } else if params.mode == Mode::Exact || params.fallback {
        if params.mode != Mode::Exact {
            report.branch = Branch::ExactFallback;
            report.fallback_reason = failure;
        }
        let res = clock.time("exact", || perfect_tiling_exact(g, &params.budget))?;
        report.exact_nodes = Some(res.nodes);
        match res.outcome {
            PerfectOutcome::Tiled(t) => {
                report.status = Status::Tiled;
                tiling = Some(t);
            }
            PerfectOutcome::Infeasible => report.status = Status::Infeasible,
            PerfectOutcome::Exhausted => report.status = Status::Exhausted,
        }
    } else {
        report.fallback_reason = failure;
    }

    if let Some(t) = &tiling {
        let v = validate_tiling(g, t, true);
        if !v.ok {
            return Err(crate::error::Error::Invariant(format!(
                "driver produced an invalid tiling: {:?}",
                v.violations
            )));
        }
        report.verdict = Some(v);
    }
    if params.timings {
        report.timings_ms = Some(clock.marks);
    }
    Ok(Solved { tiling, report })
}

/// Absorbing family on `A`, local search on `G[V \ A]`, then the leftover
/// goes into `A`. Returns the tiling (if any) and the route's report.
fn absorbing_route(g: &Hypergraph3, params: &DriverParams) -> Result<(Option<Tiling>, AbsorptionReport)> {
    let n = g.n();
    let ap = AbsorptionParams {
        alpha: params.alpha,
        seed: derive_seed(params.seed, 1),
        strict: params.strict,
        ..AbsorptionParams::default()
    };
    let mut rep = AbsorptionReport {
        family_size: 0,
        absorbing_set: 0,
        sigma: 0.0,
        p: 0.0,
        omega: 0.0,
        family_stats: FamilyStats::default(),
        attempts: 0,
        near_perfect: None,
        leftover: None,
        leftover_method: None,
        failure: None,
    };
    let family = match build_absorbing_family(g, &ap) {
        Ok(f) => f,
        Err(e) => {
            rep.failure = Some(e.to_string());
            return Ok((None, rep));
        }
    };
    rep.family_size = family.len();
    rep.absorbing_set = family.union().len();
    rep.sigma = family.sigma;
    rep.p = family.p;
    rep.omega = family.omega;
    rep.family_stats = family.stats.clone();

    let a = VertexSet::from_iter_in(n, family.union().iter().copied());
    let rest: Vec<Vertex> = (0..n).filter(|&v| !a.contains(v)).collect();
    let h = g.induced(&rest)?;
    let mut smallest: Option<(Tiling, Vec<Vertex>)> = None;
    for attempt in 0..params.restarts.max(1) {
        rep.attempts = attempt + 1;
        let cfg = NearPerfectConfig {
            gamma: params.gamma,
            stop_at: Some(0),
            seed: if attempt == 0 {
                0
            } else {
                derive_seed(params.seed, 100 + attempt as u64)
            },
            ..NearPerfectConfig::default()
        };
        let np = near_perfect_tiling(&h, &cfg)?;
        let partial: Tiling = np.tiling.copies().iter().map(|d| d.mapped(|v| rest[v])).collect();
        let covered = partial.covered_set(n);
        let w: Vec<Vertex> = rest.iter().copied().filter(|&v| !covered.contains(v)).collect();
        rep.leftover = Some(w.len());
        rep.near_perfect = Some(np.report);
        match absorb_leftover(g, &family, &w) {
            Ok(absorbed) => {
                let mut t = partial;
                t.extend(absorbed);
                rep.leftover_method = Some("absorbers".into());
                return Ok((Some(t.sorted()), rep));
            }
            Err(e) => {
                rep.failure = Some(e.to_string());
                if smallest.as_ref().is_none_or(|(_, sw)| w.len() < sw.len()) {
                    smallest = Some((partial, w));
                }
            }
        }
    }
    // G[A ∪ W] may be tileable even when no greedy assignment of blocks works
    if let Some((partial, w)) = smallest {
        let sub: Vec<Vertex> = family.union().iter().copied().chain(w.iter().copied()).collect();
        if sub.len() <= EXACT_REPAIR_LIMIT {
            if let PerfectOutcome::Tiled(t) = perfect_tiling_on(g, &sub, &params.budget)? {
                let mut full = partial;
                full.extend(t);
                rep.leftover = Some(w.len());
                rep.leftover_method = Some("exact".into());
                rep.failure = None;
                return Ok((Some(full.sorted()), rep));
            }
        }
    }
    Ok((None, rep))
}
