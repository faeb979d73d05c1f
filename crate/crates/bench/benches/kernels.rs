use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use clqnn_core::gradients::EvalMode;
use clqnn_core::noise::run_noisy;
use clqnn_core::{
    build_cl_qnn, build_he_ansatz, Axis, InnerAnsatz, LossEvaluator, MixedState, Pauli, PauliString, PureState,
};

fn thetas(p: usize) -> Vec<f64> {
    (0..p).map(|i| 0.37 * i as f64 + 0.1).collect()
}

fn kernels(c: &mut Criterion) {
    let mut group = c.benchmark_group("rotation");
    for n in [10usize, 16, 20] {
        let mut psi = PureState::zero(n).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| psi.apply_rotation(Axis::Y, black_box(0.3), n / 2).unwrap())
        });
    }
    group.finish();

    let mut psi = PureState::zero(16).unwrap();
    c.bench_function("cz 16", |b| b.iter(|| psi.apply_cz(black_box(3), 11).unwrap()));
    c.bench_function("cnot 16", |b| b.iter(|| psi.apply_cnot(black_box(3), 11).unwrap()));
}

fn circuits(c: &mut Criterion) {
    let mut group = c.benchmark_group("he run");
    for n in [8usize, 12, 16] {
        let circ = build_he_ansatz(n, 10).unwrap();
        let theta = thetas(circ.param_count());
        let input = PureState::zero(n).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| circ.run(black_box(&theta), &input).unwrap())
        });
    }
    group.finish();

    let circ = build_he_ansatz(6, 4).unwrap();
    let theta = thetas(circ.param_count());
    let rho = MixedState::zero(6).unwrap();
    c.bench_function("noisy he 6x4", |b| b.iter(|| run_noisy(&circ, black_box(&theta), 0.99, &rho).unwrap()));
}

fn gradients(c: &mut Criterion) {
    let mut group = c.benchmark_group("param shift");
    group.sample_size(20);
    for n in [6usize, 10] {
        let circ = build_cl_qnn(n, 1, 2, InnerAnsatz::HardwareEfficient { layers: 5 }).unwrap();
        let theta = thetas(circ.param_count());
        let obs = PauliString::single(n, 0, Pauli::Z).unwrap();
        let eval = LossEvaluator::new(&circ, obs, PureState::zero(n).unwrap()).unwrap();
        group.bench_with_input(BenchmarkId::new("exact", n), &n, |b, _| {
            b.iter(|| eval.param_shift_grad(black_box(&theta), EvalMode::Exact).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("100 shots", n), &n, |b, _| {
            b.iter(|| eval.param_shift_grad(black_box(&theta), EvalMode::Shots { shots: 100, seed: 1 }).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, kernels, circuits, gradients);
criterion_main!(benches);
