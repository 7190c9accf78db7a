use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use dtile::absorption::{build_absorbing_family, AbsorptionParams};
use dtile::almost_perfect::{near_perfect_tiling, NearPerfectConfig};
use dtile::constructions::construct_g1;
use dtile::exact::{max_d_free_set, perfect_tiling_exact, SearchBudget};
use dtile::{solve_driver, DriverParams};
use dtile_bench::{complete, dense_random, planted};

fn exact(c: &mut Criterion) {
    let mut group = c.benchmark_group("exact");
    let budget = SearchBudget::default();
    for n in [12, 16, 20] {
        let g = dense_random(n, 1);
        group.bench_with_input(BenchmarkId::new("perfect_tiling", n), &g, |b, g| {
            b.iter(|| perfect_tiling_exact(black_box(g), &budget).unwrap())
        });
    }
    let g1 = construct_g1(16).unwrap();
    group.bench_function("perfect_tiling_g1_16", |b| {
        b.iter(|| perfect_tiling_exact(black_box(&g1), &budget).unwrap())
    });
    for n in [12, 16] {
        let g = dense_random(n, 2);
        group.bench_with_input(BenchmarkId::new("max_d_free_set", n), &g, |b, g| {
            b.iter(|| max_d_free_set(black_box(g), &budget).unwrap())
        });
    }
    group.finish();
}

fn local_search(c: &mut Criterion) {
    let mut group = c.benchmark_group("near_perfect");
    let cfg = NearPerfectConfig {
        stop_at: Some(0),
        ..NearPerfectConfig::default()
    };
    for n in [32, 48, 64] {
        let g = dense_random(n, 3);
        group.bench_with_input(BenchmarkId::from_parameter(n), &g, |b, g| {
            b.iter(|| near_perfect_tiling(black_box(g), &cfg).unwrap())
        });
    }
    group.finish();
}

fn absorbing_family(c: &mut Criterion) {
    let mut group = c.benchmark_group("absorbing_family");
    group.sample_size(20);
    for n in [48, 64] {
        let g = dense_random(n, 4);
        group.bench_with_input(BenchmarkId::from_parameter(n), &g, |b, g| {
            b.iter(|| build_absorbing_family(black_box(g), &AbsorptionParams::default()).unwrap())
        });
    }
    group.finish();
}

fn driver(c: &mut Criterion) {
    let mut group = c.benchmark_group("driver");
    group.sample_size(20);
    let params = DriverParams::default();
    for (name, g) in [
        ("planted_40", planted(40)),
        ("random_48", dense_random(48, 5)),
        ("random_64", dense_random(64, 5)),
        ("complete_32", complete(32)),
    ] {
        group.bench_function(name, |b| b.iter(|| solve_driver(black_box(&g), &params).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, exact, local_search, absorbing_family, driver);
criterion_main!(benches);
