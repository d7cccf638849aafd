use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use phasebound::clock::linspace;
use phasebound::*;

fn bounds(c: &mut Criterion) {
    let mut group = c.benchmark_group("random-instance");
    for dim in [2, 4, 8] {
        let inst = (0..).map(|k| RandomInstance::draw(11, k).unwrap()).find(|i| i.dim() == dim).unwrap();
        let state = phase_evolve(&inst.state, &inst.generator, inst.theta).unwrap();
        group.bench_with_input(BenchmarkId::new("enhanced", inst.dim()), &inst, |b, inst| {
            b.iter(|| enhanced_sensitivity(&inst.state, &inst.generator, &inst.basis, inst.theta).unwrap())
        });
        let outcomes: Vec<usize> = (0..inst.basis.len()).collect();
        let family = OperatorFamily::generator_with_projectors(&inst.generator, &inst.basis, &outcomes).unwrap();
        group.bench_with_input(BenchmarkId::new("moment-data", inst.dim()), &state, |b, state| {
            b.iter(|| moment_data(black_box(state), &family).unwrap())
        });
    }
    group.finish();
}

fn clock(c: &mut Criterion) {
    let mut group = c.benchmark_group("clock");
    group.sample_size(10);
    for j in [25.0, 100.0] {
        let model = ClockModel::new(SpinLength::new(j).unwrap());
        let tau = model.scaled_to_tau(0.94);
        group.bench_with_input(BenchmarkId::new("breakdown", j), &tau, |b, &tau| {
            b.iter(|| model.breakdown(tau, 0.0).unwrap())
        });
        let taus: Vec<f64> = linspace(0.0, 3.0, 30).iter().map(|&s| model.scaled_to_tau(s)).collect();
        group.bench_with_input(BenchmarkId::new("sweep-30", j), &taus, |b, taus| {
            b.iter(|| model.sweep(taus, 0.0).unwrap())
        });
    }
    group.bench_function("tau-opt/25", |b| b.iter(|| find_tau_opt(25.0, 0.0).unwrap()));
    group.finish();
}

fn verification(c: &mut Criterion) {
    let mut group = c.benchmark_group("verify");
    group.sample_size(10);
    group.bench_function("quick", |b| b.iter(|| run_verification(&VerifyConfig::quick(42))));
    group.finish();
}

criterion_group!(benches, bounds, clock, verification);
criterion_main!(benches);
