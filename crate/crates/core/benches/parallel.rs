use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand_distr::{Distribution, StandardNormal};
use std::hint::black_box;

use vwa_core::simulation::{coverage_fixed_width, FixedWidthMode, SimConfig};
use vwa_core::{reconstruct, Execution, KernelSpec, RngSeed};

const MODES: [(&str, Execution); 2] = [("serial", Execution::Serial), ("parallel", Execution::Parallel)];

fn bench_reconstruct(c: &mut Criterion) {
    let mut rng = RngSeed::from_master(7).rng();
    let series: Vec<f64> = (0..2000)
        .map(|i| {
            let level = if i < 1000 { 0.0 } else { 3.0 };
            let e: f64 = StandardNormal.sample(&mut rng);
            level + e
        })
        .collect();
    let kernel = KernelSpec::gaussian(0.6).unwrap();
    let mut group = c.benchmark_group("reconstruct");
    group.sample_size(20);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| reconstruct(black_box(&series), &kernel, exec).unwrap())
        });
    }
    group.finish();
}

fn bench_fixed_width(c: &mut Criterion) {
    let base = SimConfig {
        precisions: vec![0.2],
        levels: vec![0.95],
        q_grid: vec![0.5],
        runs: 2_000,
        oracle_size: 20_000,
        ..SimConfig::default()
    };
    let mut group = c.benchmark_group("fixed_width_coverage");
    group.sample_size(10);
    for (name, exec) in MODES {
        let config = SimConfig {
            execution: exec,
            ..base.clone()
        };
        group.bench_with_input(BenchmarkId::from_parameter(name), &config, |b, config| {
            b.iter(|| coverage_fixed_width(black_box(config), FixedWidthMode::Rule).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_reconstruct, bench_fixed_width);
criterion_main!(benches);
