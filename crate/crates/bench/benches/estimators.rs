use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use strata_bench::{gaussian_population, kadilar};
use strata_core::montecarlo::{
    draw_srswor, enumerate_exact, grid_lambda_oracle, simulate, SimulationConfig,
};
use strata_core::{pre_table, EstimatorId};

fn bench_analysis(c: &mut Criterion) {
    let design = kadilar();
    c.bench_function("pre_table/kadilar", |b| {
        b.iter(|| pre_table(black_box(&design)))
    });
    c.bench_function("grid_lambda_oracle/100x100", |b| {
        b.iter(|| grid_lambda_oracle(black_box(&design), (0.0, 2.0), (-0.2, 0.2), 100).unwrap())
    });
}

fn bench_sampling(c: &mut Criterion) {
    let pop = gaussian_population(2000);
    let mut group = c.benchmark_group("montecarlo");
    group.bench_function("draw_srswor/3x100", |b| {
        let mut rep = 0u64;
        b.iter(|| {
            rep += 1;
            draw_srswor(black_box(&pop), &[100, 100, 100], rep, 1).unwrap()
        })
    });
    group.sample_size(10);
    group.bench_function("simulate/1000reps", |b| {
        b.iter(|| {
            simulate(
                &pop,
                &[100, 100, 100],
                &EstimatorId::ALL,
                SimulationConfig::new(1000, 1),
            )
            .unwrap()
        })
    });
    let tiny = gaussian_population(8);
    group.bench_function("enumerate_exact/3x(8 choose 3)", |b| {
        b.iter(|| enumerate_exact(black_box(&tiny), &[3, 3, 3]).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_analysis, bench_sampling);
criterion_main!(benches);
