use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::Rng;

use dtile::absorption::{
    absorb_leftover, absorbers_exhaustive, absorbs, build_absorbing_family, find_absorber_gadget, AbsorptionParams,
};
use dtile::almost_perfect::{find_two_path, near_perfect_tiling, NearPerfectConfig};
use dtile::constructions::{
    codegree_threshold, complete_3graph, construct_g0, construct_g1, lower_bound_parts, planted_extremal,
    random_codegree_instance, steiner_triple_system,
};
use dtile::exact::{max_d_free_set, max_tiling_exact, perfect_tiling_exact, PerfectOutcome, SearchBudget};
use dtile::extremal::{run_extremal, ExtremalParams};
use dtile::format::{parse_certificate, parse_instance, write_certificate, write_instance};
use dtile::rng::seeded;
use dtile::{validate_tiling, Hypergraph3, VertexSet};

fn graph(n: usize, p: f64, seed: u64) -> Hypergraph3 {
    let mut rng = seeded(seed);
    let mut triples = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                if rng.random_bool(p) {
                    triples.push([a, b, c]);
                }
            }
        }
    }
    Hypergraph3::build(n, triples).unwrap()
}

prop_compose! {
    fn any_graph(max_n: usize)(n in 4..=max_n, p in 0.0..0.8f64, seed in any::<u64>()) -> Hypergraph3 {
        graph(n, p, seed)
    }
}

prop_compose! {
    fn graph_and_perm(max_n: usize)(g in any_graph(max_n))
        (perm in Just((0..g.n()).collect::<Vec<usize>>()).prop_shuffle(), g in Just(g)) -> (Hypergraph3, Vec<usize>) {
        (g, perm)
    }
}

prop_compose! {
    fn tiling_size(ns: &'static [usize])(i in 0..ns.len(), p in 0.1..0.7f64, seed in any::<u64>()) -> Hypergraph3 {
        graph(ns[i], p, seed)
    }
}

fn budget() -> SearchBudget {
    SearchBudget::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn codegree_sum_is_three_times_edges(g in any_graph(14)) {
        let n = g.n();
        let mut sum = 0;
        for u in 0..n {
            for v in u + 1..n {
                sum += g.codegree(u, v).unwrap();
            }
        }
        prop_assert_eq!(sum, 3 * g.edge_count());
    }

    #[test]
    fn rebuilding_preserves_codegrees(g in any_graph(14)) {
        let rebuilt = Hypergraph3::build(g.n(), g.edges().iter().rev().map(|&[a, b, c]| [c, a, b])).unwrap();
        let parsed = parse_instance(&write_instance(&g)).unwrap();
        for u in 0..g.n() {
            for v in u + 1..g.n() {
                prop_assert_eq!(g.codegree(u, v).unwrap(), rebuilt.codegree(u, v).unwrap());
                prop_assert_eq!(g.codegree(u, v).unwrap(), parsed.codegree(u, v).unwrap());
            }
        }
    }

    #[test]
    fn d_copy_count_survives_relabelling((g, perm) in graph_and_perm(12)) {
        let h = g.relabel(&perm).unwrap();
        prop_assert_eq!(g.d_copy_count(None), h.d_copy_count(None));
        prop_assert_eq!(g.edge_count(), h.edge_count());
    }

    #[test]
    fn d_free_matches_pairwise_scan(g in any_graph(20), mask in any::<u32>()) {
        let n = g.n();
        let s = VertexSet::from_iter_in(n, (0..n).filter(|v| mask >> v & 1 == 1));
        let inside: Vec<_> = g.edges().iter().filter(|e| e.iter().all(|&v| s.contains(v))).collect();
        let mut has_d = false;
        for (i, e) in inside.iter().enumerate() {
            for f in &inside[i + 1..] {
                if e.iter().filter(|v| f.contains(v)).count() == 2 {
                    has_d = true;
                }
            }
        }
        prop_assert_eq!(g.is_d_free(&s), !has_d);
    }

    #[test]
    fn vertex_set_matches_btreeset(n in 1..200usize, a in proptest::collection::vec(any::<usize>(), 0..60),
                                   b in proptest::collection::vec(any::<usize>(), 0..60)) {
        let a: Vec<usize> = a.into_iter().map(|x| x % n).collect();
        let b: Vec<usize> = b.into_iter().map(|x| x % n).collect();
        let (sa, sb) = (VertexSet::from_iter_in(n, a.iter().copied()), VertexSet::from_iter_in(n, b.iter().copied()));
        let (ta, tb): (BTreeSet<usize>, BTreeSet<usize>) = (a.into_iter().collect(), b.into_iter().collect());
        prop_assert_eq!(sa.to_vec(), ta.iter().copied().collect::<Vec<_>>());
        prop_assert_eq!(sa.intersection(&sb).to_vec(), ta.intersection(&tb).copied().collect::<Vec<_>>());
        prop_assert_eq!(sa.difference(&sb).to_vec(), ta.difference(&tb).copied().collect::<Vec<_>>());
        prop_assert_eq!(sa.intersection_len(&sb), ta.intersection(&tb).count());
        prop_assert_eq!(sa.is_subset(&sb), ta.is_subset(&tb));
        prop_assert_eq!(sa.complement().len(), n - ta.len());
    }

    #[test]
    fn perfect_iff_max_is_quarter(g in tiling_size(&[4, 8, 12])) {
        let perfect = perfect_tiling_exact(&g, &budget()).unwrap();
        let max = max_tiling_exact(&g, &budget()).unwrap();
        prop_assert!(max.optimal);
        prop_assert!(validate_tiling(&g, &max.value, false).ok);
        match perfect.outcome {
            PerfectOutcome::Tiled(t) => {
                prop_assert!(validate_tiling(&g, &t, true).ok);
                prop_assert_eq!(max.value.len(), g.n() / 4);
            }
            PerfectOutcome::Infeasible => prop_assert!(max.value.len() < g.n() / 4),
            PerfectOutcome::Exhausted => prop_assert!(false, "budget exhausted"),
        }
    }

    #[test]
    fn solvers_ignore_labels((g, perm) in graph_and_perm(12)) {
        prop_assume!(g.n() % 4 == 0);
        let h = g.relabel(&perm).unwrap();
        let feasible = |g: &Hypergraph3| matches!(perfect_tiling_exact(g, &budget()).unwrap().outcome, PerfectOutcome::Tiled(_));
        prop_assert_eq!(feasible(&g), feasible(&h));
        prop_assert_eq!(max_tiling_exact(&g, &budget()).unwrap().value.len(), max_tiling_exact(&h, &budget()).unwrap().value.len());
        let (fg, fh) = (max_d_free_set(&g, &budget()).unwrap(), max_d_free_set(&h, &budget()).unwrap());
        prop_assert_eq!(fg.value.len(), fh.value.len());
        prop_assert!(g.is_d_free(&VertexSet::from_iter_in(g.n(), fg.value)));
    }

    #[test]
    fn free_sets_obey_three_quarters(i in 0..2usize, seed in any::<u64>()) {
        let n = [8, 12][i];
        let g = random_codegree_instance(n, codegree_threshold(n).unwrap(), seed).unwrap().graph;
        let s = max_d_free_set(&g, &budget()).unwrap();
        prop_assert!(s.optimal);
        prop_assert!(4 * s.value.len() <= 3 * n);
    }

    #[test]
    fn certificates_round_trip(g in tiling_size(&[8, 12, 16])) {
        let t = max_tiling_exact(&g, &SearchBudget::nodes(200_000)).unwrap().value;
        let cert = parse_certificate(&write_certificate(&t, g.n())).unwrap();
        prop_assert_eq!(cert.tiling.copies(), t.copies());
        prop_assert_eq!(cert.claims_perfect, 4 * t.len() == g.n());
    }

    #[test]
    fn two_path_exists_past_half_density(k in 3..30usize, edges in proptest::collection::vec((0..30usize, 0..30usize), 0..40)) {
        let edges: BTreeSet<(usize, usize)> = edges
            .into_iter()
            .map(|(a, b)| (a % k, b % k))
            .filter(|(a, b)| a != b)
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        let edges: Vec<_> = edges.into_iter().collect();
        let path = find_two_path(&edges, &VertexSet::new(k));
        if 2 * edges.len() > k {
            prop_assert!(path.is_some());
        }
        if let Some([a, c, b]) = path {
            let has = |x: usize, y: usize| edges.contains(&(x.min(y), x.max(y)));
            prop_assert!(a != b && has(a, c) && has(c, b));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn absorbs_is_monotone(p in 0.4..0.9f64, seed in any::<u64>(), extra in proptest::collection::vec((0..12usize, 0..12usize, 0..12usize), 1..20)) {
        let g = graph(12, p, seed);
        let (s, u) = ([0, 1, 2, 3, 4, 5, 6, 7], [8, 9, 10, 11]);
        let before = absorbs(&g, &s, &u).unwrap();
        let added = extra.into_iter().filter(|(a, b, c)| a != b && b != c && a != c).map(|(a, b, c)| [a, b, c]);
        let h = Hypergraph3::build(12, g.edges().iter().copied().chain(added)).unwrap();
        if before {
            prop_assert!(absorbs(&h, &s, &u).unwrap());
        }
    }

    #[test]
    fn gadgets_are_exhaustive_absorbers(p in 0.5..0.95f64, seed in any::<u64>()) {
        let g = graph(14, p, seed);
        let u = [0, 1, 2, 3];
        let all = absorbers_exhaustive(&g, &u).unwrap();
        for run in 0..100 {
            if let Some(s) = find_absorber_gadget(&g, &u, run).unwrap() {
                prop_assert!(absorbs(&g, &s, &u).unwrap());
                prop_assert!(all.contains(&s), "gadget {:?} missing from the exhaustive list", s);
            }
        }
    }

    #[test]
    fn moves_shrink_leftover_by_four(g in tiling_size(&[12, 16, 20]), seed in any::<u64>()) {
        let cfg = NearPerfectConfig { stop_at: Some(0), seed, ..NearPerfectConfig::default() };
        let r = near_perfect_tiling(&g, &cfg).unwrap();
        prop_assert!(validate_tiling(&g, &r.tiling, false).ok);
        let traj = &r.report.leftover_trajectory;
        prop_assert!(traj.windows(2).all(|w| w[0] == w[1] + 4));
        prop_assert_eq!(*traj.last().unwrap(), r.report.leftover);
        prop_assert_eq!(r.report.leftover, g.n() - 4 * r.tiling.len());
    }

    #[test]
    fn perturbed_planted_stages_stay_valid(k in 2..7usize, extra in proptest::collection::vec((0..28usize, 0..28usize, 0..28usize), 0..12)) {
        let n = 4 * k;
        let planted = planted_extremal(n).unwrap();
        // extra triples inside the large side create D-copies there
        let inside = extra
            .into_iter()
            .map(|(a, b, c)| [k + a % (n - k), k + b % (n - k), k + c % (n - k)])
            .filter(|[a, b, c]| a != b && b != c && a != c);
        let g = Hypergraph3::build(n, planted.edges().iter().copied().chain(inside)).unwrap();
        let z = VertexSet::from_iter_in(n, max_d_free_set(&g, &budget()).unwrap().value);
        let run = run_extremal(&g, &z, &ExtremalParams::default(), &budget()).unwrap();
        if let Ok(t) = &run.result {
            prop_assert!(validate_tiling(&g, t, true).ok);
            let [q, r, s, tt] = run.report.stage_sizes;
            prop_assert_eq!(q + r + s + tt, n / 4);
            prop_assert_eq!(Some(tt), run.report.m);
        }
    }
}

#[test]
fn sts_blocks_cover_pairs_once() {
    for m in (3..=99).filter(|m| m % 6 == 1 || m % 6 == 3) {
        let g = steiner_triple_system(m).unwrap();
        assert_eq!(g.edge_count(), m * (m - 1) / 6, "m = {m}");
        assert_eq!((g.min_codegree(), g.max_codegree()), (1, 1), "m = {m}");
        assert!(g.is_d_free(&g.vertex_set()), "m = {m}");
    }
    for m in [4, 5, 6, 8, 11, 12, 100] {
        assert!(steiner_triple_system(m).is_err(), "m = {m}");
    }
}

#[test]
fn lower_bound_copies_meet_the_small_side() {
    for (n, g) in [
        (8, construct_g1(8)),
        (12, construct_g0(12)),
        (16, construct_g1(16)),
        (20, construct_g0(20)),
    ] {
        let g = g.unwrap();
        let (a, _) = lower_bound_parts(n).unwrap();
        assert!(
            g.d_copies(None).iter().all(|d| d.vertices().iter().any(|&v| v < a)),
            "n = {n}"
        );
    }
    for n in [8, 16] {
        let g = construct_g1(n).unwrap();
        let max = max_tiling_exact(&g, &budget()).unwrap();
        assert!(max.optimal && max.value.len() < n / 4, "n = {n}");
    }
}

#[test]
fn planted_is_tileable() {
    for n in [4, 8, 12, 16, 20, 24] {
        let g = planted_extremal(n).unwrap();
        let r = perfect_tiling_exact(&g, &budget()).unwrap();
        assert!(matches!(r.outcome, PerfectOutcome::Tiled(_)), "n = {n}");
    }
}

/// Counts, rather than hides, local-search stalls on tileable graphs.
#[test]
fn local_search_nearly_perfect_on_tileable_graphs() {
    let (mut runs, mut near) = (0, 0);
    for seed in 0..20u64 {
        let n = [8, 12, 16][seed as usize % 3];
        let g = random_codegree_instance(n, n / 4, seed).unwrap().graph;
        if !matches!(
            perfect_tiling_exact(&g, &budget()).unwrap().outcome,
            PerfectOutcome::Tiled(_)
        ) {
            continue;
        }
        for s in 0..10 {
            let cfg = NearPerfectConfig {
                stop_at: Some(0),
                seed: s,
                ..NearPerfectConfig::default()
            };
            let r = near_perfect_tiling(&g, &cfg).unwrap();
            runs += 1;
            near += usize::from(r.report.leftover <= 8);
        }
    }
    assert!(runs > 0);
    assert_eq!(near, runs, "{} of {runs} runs stalled above 8", runs - near);
}

#[test]
fn family_invariants_hold_post_hoc() {
    for seed in 0..4 {
        let g = random_codegree_instance(40, 14, seed).unwrap().graph;
        let params = AbsorptionParams {
            seed,
            ..AbsorptionParams::default()
        };
        let family = build_absorbing_family(&g, &params).unwrap();
        family.check(&g).unwrap();
        assert!(family.union().len() as f64 <= params.alpha * 40.0);
        let mut seen = BTreeSet::new();
        for (i, s) in family.members().iter().enumerate() {
            assert!(s.iter().all(|&v| seen.insert(v)), "member {i} overlaps");
            assert!(validate_tiling(&g, family.tiling(i), false).ok);
        }
        let w: Vec<usize> = (0..40).filter(|v| !seen.contains(v)).take(4).collect();
        if let Ok(t) = absorb_leftover(&g, &family, &w) {
            let covered: BTreeSet<usize> = t.covered().into_iter().collect();
            let expected: BTreeSet<usize> = seen.iter().copied().chain(w.iter().copied()).collect();
            assert_eq!(covered, expected);
            assert_eq!(t.len(), expected.len() / 4);
        }
    }
    let k = complete_3graph(40).unwrap();
    let family = build_absorbing_family(&k, &AbsorptionParams::default()).unwrap();
    let free: Vec<usize> = (0..40).filter(|v| !family.union().contains(v)).take(4).collect();
    let t = absorb_leftover(&k, &family, &free).unwrap();
    assert!(validate_tiling(&k, &t, false).ok);
}
