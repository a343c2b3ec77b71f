use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rayon::ThreadPool;

use convex_lines::enumerator::{build_weight_table, TableMode, WeightTable};
use convex_lines::geometry::tangential_distance_to_limit;
use convex_lines::measure::{calibrate, covariance, expected_endpoint, select_window};
use convex_lines::sampler::{conditioned_batch, exact_batch, free_batch};
use convex_lines::SumMethod;

fn pools() -> Vec<(String, ThreadPool)> {
    let default = rayon::current_num_threads();
    let mut out = vec![("1-thread".to_string(), rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap())];
    if default > 1 {
        out.push((format!("{default}-threads"), rayon::ThreadPoolBuilder::new().num_threads(default).build().unwrap()));
    }
    out
}

fn lattice_sums(c: &mut Criterion) {
    let p = calibrate((216, 216), 1.0).unwrap();
    let mut g = c.benchmark_group("lattice_sums");
    for (name, pool) in pools() {
        g.bench_function(BenchmarkId::new("endpoint_direct", &name), |b| {
            b.iter(|| pool.install(|| expected_endpoint(black_box(&p), SumMethod::Direct, 1e-9).unwrap()))
        });
        g.bench_function(BenchmarkId::new("covariance_moebius", &name), |b| {
            b.iter(|| pool.install(|| covariance(black_box(&p), SumMethod::MOEBIUS, 1e-6).unwrap()))
        });
    }
    g.finish();
}

fn weight_tables(c: &mut Criterion) {
    let mut g = c.benchmark_group("weight_table");
    g.sample_size(10);
    for n in [20u32, 40] {
        g.bench_with_input(BenchmarkId::new("log_domain", n), &n, |b, &n| {
            b.iter(|| build_weight_table((n, n), 1.5, TableMode::LogDomain).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("exact_integer", n), &n, |b, &n| {
            b.iter(|| build_weight_table((n, n), 1.0, TableMode::ExactInteger).unwrap())
        });
    }
    g.finish();
}

fn sampling(c: &mut Criterion) {
    let p40 = calibrate((40, 40), 1.0).unwrap();
    let window = select_window(&p40, 1e-12);
    let table = WeightTable::with_prefixes((40, 40), 1.0).unwrap();
    let p12 = calibrate((12, 12), 1.0).unwrap();
    let lines = exact_batch(&p40, &table, 64, 3).unwrap().lines;
    let mut g = c.benchmark_group("sampling");
    g.sample_size(10);
    for (name, pool) in pools() {
        g.bench_function(BenchmarkId::new("free_10k", &name), |b| {
            b.iter(|| pool.install(|| free_batch(&p40, &window, 10_000, 1)))
        });
        g.bench_function(BenchmarkId::new("exact_dp_1k", &name), |b| {
            b.iter(|| pool.install(|| exact_batch(&p40, &table, 1000, 2).unwrap()))
        });
        g.bench_function(BenchmarkId::new("rejection_1k_n12", &name), |b| {
            b.iter(|| pool.install(|| conditioned_batch(&p12, 1000, 4, 1 << 30).unwrap()))
        });
        g.bench_function(BenchmarkId::new("distance_to_limit_64", &name), |b| {
            b.iter(|| {
                pool.install(|| {
                    convex_lines::exec::map_indexed(lines.len(), |i| tangential_distance_to_limit(&lines[i], (40, 40)))
                })
            })
        });
    }
    g.finish();
}

criterion_group!(benches, lattice_sums, weight_tables, sampling);
criterion_main!(benches);
