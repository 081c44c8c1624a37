use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use otto_core::experiments::{fig2_cases, fig45_cases, fig67_cases, run_sweep, SweepCase};
use otto_core::Execution;

fn compare(c: &mut Criterion, group: &str, cases: &[SweepCase]) {
    let mut g = c.benchmark_group(group);
    g.sample_size(10);
    for (label, mode) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
        g.bench_with_input(BenchmarkId::from_parameter(label), &mode, |b, &mode| {
            b.iter(|| run_sweep(cases, mode).unwrap())
        });
    }
    g.finish();
}

fn bench_two_particle(c: &mut Criterion) {
    compare(c, "fig2_200_points", &fig2_cases(200).unwrap());
    // N up to 100: enumeration over thousands of pair states per point
    compare(c, "fig4_large_n", &fig45_cases(0.05, &[25, 50, 100], 50).unwrap());
}

fn bench_multiparticle(c: &mut Criterion) {
    let particles: Vec<usize> = (1..=10).collect();
    compare(c, "fig7_recursion", &fig67_cases(1.0, &particles, &[10, 25, 50]).unwrap());
}

criterion_group!(benches, bench_two_particle, bench_multiparticle);
criterion_main!(benches);
