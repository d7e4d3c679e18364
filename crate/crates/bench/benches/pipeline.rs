use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use qerase_bench::{reference_params, warm_state};
use qerase_core::dynamics::{evolve_block, oracle_evolve_block};
use qerase_core::entanglement::{log_negativity, oracle_log_negativity};
use qerase_core::erasure::Outcome;
use qerase_core::sweep::{run_sweep, Axis, AxisParam, SweepBase, SweepMode, SweepSpec};
use qerase_core::thermal::{mix_thermal, ThermalSpec, TimeSpec, TruncationConfig};

fn bench_block_evolution(c: &mut Criterion) {
    let params = reference_params();
    c.bench_function("evolve_block", |b| {
        b.iter(|| evolve_block(black_box(3), black_box(2), black_box(7.5), &params))
    });
    c.bench_function("oracle_evolve_block", |b| {
        b.iter(|| oracle_evolve_block(black_box(3), black_box(2), black_box(7.5), &params, 1))
    });
}

fn bench_thermal_mixing(c: &mut Criterion) {
    let params = reference_params();
    let trunc = TruncationConfig::default();
    let mut group = c.benchmark_group("mix_thermal_stationary");
    for mbar in [0.5, 1.0, 2.0] {
        let spec = ThermalSpec::new(mbar, mbar).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(mbar), &spec, |b, spec| {
            b.iter(|| mix_thermal(TimeSpec::Stationary, &params, spec, &trunc, Outcome::Plus))
        });
    }
    group.finish();
}

fn bench_log_negativity(c: &mut Criterion) {
    let mut group = c.benchmark_group("log_negativity_chains");
    for mbar in [0.5, 1.0, 2.0] {
        let state = warm_state(mbar);
        group.bench_with_input(BenchmarkId::from_parameter(mbar), &state, |b, state| {
            b.iter(|| log_negativity(black_box(state)))
        });
    }
    group.finish();

    // The dense oracle only fits small states.
    let small = warm_state(0.2);
    c.bench_function("oracle_log_negativity_dense", |b| {
        b.iter(|| oracle_log_negativity(black_box(&small)))
    });
}

fn bench_sweep_row(c: &mut Criterion) {
    let base = SweepBase {
        params: reference_params(),
        thermal: ThermalSpec::new(0.0, 0.0).unwrap(),
        t: None,
        outcome: Outcome::Plus,
        trunc: TruncationConfig::default(),
    };
    let spec = SweepSpec {
        axes: vec![Axis {
            param: AxisParam::MbarAlpha,
            start: 0.0,
            stop: 1.0,
            step: 0.1,
        }],
        mode: SweepMode::Stationary,
        mbar_sum: None,
    };
    c.bench_function("sweep_row_stationary", |b| {
        b.iter(|| run_sweep(black_box(&spec), black_box(&base)))
    });
}

criterion_group!(
    benches,
    bench_block_evolution,
    bench_thermal_mixing,
    bench_log_negativity,
    bench_sweep_row
);
criterion_main!(benches);
