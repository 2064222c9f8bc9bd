use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use abl_core::builders::{mehlhorn_build, optimal_static, FrequencyTable};
use abl_core::cost::Model;
use abl_core::offline::offline_single_source;
use abl_core::online::{run_online, OnlinePolicy};
use abl_core::oracle::exact_opt;
use abl_core::trace::{generate, TraceKind};
use abl_core::tree::Tree;
use abl_core::CostParams;

fn zipf_table(n: u32) -> FrequencyTable {
    let counts: Vec<u64> = (1..=n as u64).map(|i| 10_000 / i).collect();
    FrequencyTable::from_counts(counts)
}

fn bench_static_builders(c: &mut Criterion) {
    let mut group = c.benchmark_group("static_builders");
    for n in [64u32, 256] {
        let table = zipf_table(n);
        group.bench_with_input(BenchmarkId::new("mehlhorn_build", n), &table, |b, table| {
            b.iter(|| mehlhorn_build(black_box(table)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("optimal_static", n), &table, |b, table| {
            b.iter(|| optimal_static(black_box(table)).unwrap())
        });
    }
    group.finish();
}

fn bench_offline(c: &mut Criterion) {
    let n = 64;
    let m = 1000;
    let params = CostParams::new(n, 8.0);
    let seq = generate(TraceKind::Zipf(1.1), Model::SingleSource, n, m, 7).unwrap();
    c.bench_function("offline_single_source_n64_m1000", |b| {
        b.iter(|| offline_single_source(black_box(&seq), &params).unwrap())
    });
}

fn bench_online(c: &mut Criterion) {
    let n = 64;
    let m = 1000;
    let params = CostParams::new(n, 8.0);
    let seq = generate(TraceKind::Zipf(1.1), Model::SingleSource, n, m, 7).unwrap();
    let initial = Tree::balanced(n).unwrap();
    c.bench_function("online_budget_n64_m1000", |b| {
        b.iter(|| run_online(black_box(&seq), OnlinePolicy::default(), &params, initial.clone()).unwrap())
    });
}

fn bench_oracle(c: &mut Criterion) {
    let n = 6;
    let m = 40;
    let params = CostParams::new(n, 3.0);
    let seq = generate(TraceKind::UniformRandom, Model::SingleSource, n, m, 7).unwrap();
    c.bench_function("exact_opt_n6_m40", |b| b.iter(|| exact_opt(black_box(&seq), &params).unwrap()));
}

criterion_group!(benches, bench_static_builders, bench_offline, bench_online, bench_oracle);
criterion_main!(benches);
