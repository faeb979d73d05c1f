mod common;

use clqnn_core::circuit::{build_cl_qnn, InnerAnsatz};
use clqnn_core::noise::{expectation_mixed, run_noisy, MixedState};
use clqnn_core::optim::{OptimizerKind, OptimizerState};
use clqnn_core::pauli::expectation_exact;
use clqnn_core::{grad_norm_sq, seed, Axis, EvalMode, Hamiltonian, LossEvaluator, PauliString, PureState};
use common::*;
use proptest::prelude::*;
use rand::Rng;

fn axis() -> impl Strategy<Value = Axis> {
    prop_oneof![Just(Axis::X), Just(Axis::Y), Just(Axis::Z)]
}

fn pauli_string(n: usize) -> impl Strategy<Value = PauliString> {
    prop::collection::vec(0u8..4, n).prop_map(|v| PauliString::from_indices(&v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gate_sequences_preserve_norm(n in 1usize..=6, len in 0usize..60, s in any::<u64>()) {
        let mut rng = seed::stream(s, &[]);
        let circ = random_circuit(n, len, &mut rng);
        let theta = random_theta(circ.param_count(), &mut rng);
        let out = circ.run(&theta, &random_state(n, &mut rng)).unwrap();
        prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rotations_compose_additively(a in axis(), x in -7.0f64..7.0, y in -7.0f64..7.0, s in any::<u64>()) {
        let mut rng = seed::stream(s, &[]);
        let psi = random_state(3, &mut rng);
        let q = rng.gen_range(0..3);
        let mut two = psi.clone();
        two.apply_rotation(a, x, q).unwrap();
        two.apply_rotation(a, y, q).unwrap();
        let mut one = psi;
        one.apply_rotation(a, x + y, q).unwrap();
        prop_assert!(max_diff(one.amplitudes(), two.amplitudes()) < 1e-10);
    }

    #[test]
    fn gates_on_disjoint_qubits_commute(a1 in axis(), a2 in axis(), t1 in -4.0f64..4.0, t2 in -4.0f64..4.0, s in any::<u64>()) {
        let mut rng = seed::stream(s, &[]);
        let psi = random_state(4, &mut rng);
        let mut ab = psi.clone();
        ab.apply_rotation(a1, t1, 0).unwrap();
        ab.apply_cz(2, 3).unwrap();
        ab.apply_rotation(a2, t2, 1).unwrap();
        let mut ba = psi;
        ba.apply_rotation(a2, t2, 1).unwrap();
        ba.apply_cz(2, 3).unwrap();
        ba.apply_rotation(a1, t1, 0).unwrap();
        prop_assert!(max_diff(ab.amplitudes(), ba.amplitudes()) < 1e-12);
    }

    #[test]
    fn z_strings_invariant_under_cz(mask in prop::collection::vec(any::<bool>(), 4), a in 0usize..4, d in 1usize..4, s in any::<u64>()) {
        let mut rng = seed::stream(s, &[]);
        let idx: Vec<u8> = mask.iter().map(|&z| if z { 3 } else { 0 }).collect();
        let p = PauliString::from_indices(&idx).unwrap();
        let psi = random_state(4, &mut rng);
        let before = expectation_exact(&psi, &p).unwrap();
        let mut after = psi;
        after.apply_cz(a, (a + d) % 4).unwrap();
        prop_assert!((expectation_exact(&after, &p).unwrap() - before).abs() < 1e-12);
    }

    #[test]
    fn index_maps_are_idempotent(p in pauli_string(6)) {
        prop_assert_eq!(p.three_bar().three_bar(), p.three_bar());
        prop_assert_eq!(p.three_bar_two().three_bar_two(), p.three_bar_two());
        prop_assert_eq!(p.three_bar().locality(), p.locality());
    }

    #[test]
    fn hamiltonian_expectation_is_linear(p1 in pauli_string(3), p2 in pauli_string(3), a in -2.0f64..2.0, b in -2.0f64..2.0, s in any::<u64>()) {
        let mut rng = seed::stream(s, &[]);
        let psi = random_state(3, &mut rng);
        let h = Hamiltonian::new(3, [(a, p1.clone()), (b, p2.clone())]).unwrap();
        let want = a * expectation_exact(&psi, &p1).unwrap() + b * expectation_exact(&psi, &p2).unwrap();
        prop_assert!((h.expectation::<seed::StreamRng>(&psi, None).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn loss_is_two_pi_periodic(s in any::<u64>()) {
        let mut rng = seed::stream(s, &[]);
        let circ = random_circuit(4, 20, &mut rng);
        let theta = random_theta(circ.param_count(), &mut rng);
        let eval = LossEvaluator::new(&circ, "ZIXI".parse::<PauliString>().unwrap(), PureState::zero(4).unwrap()).unwrap();
        let f = eval.eval(&theta).unwrap();
        for j in 0..theta.len() {
            let mut t = theta.clone();
            t[j] += std::f64::consts::TAU;
            prop_assert!((eval.eval(&t).unwrap() - f).abs() < 1e-10);
        }
    }

    #[test]
    fn depolarizing_is_cptp(q in 0.0f64..=1.0, s in any::<u64>()) {
        let mut rng = seed::stream(s, &[]);
        let n = rng.gen_range(1..=4);
        let circ = random_circuit(n, 12, &mut rng);
        let theta = random_theta(circ.param_count(), &mut rng);
        let mut rho = MixedState::from_pure(&random_state(n, &mut rng)).unwrap();
        for _ in 0..3 {
            rho = run_noisy(&circ, &theta, q, &rho).unwrap();
            rho.depolarize_qubit(q, rng.gen_range(0..n)).unwrap();
        }
        prop_assert!((rho.trace() - 1.0).abs() < 1e-12);
        prop_assert!(rho.hermiticity_deviation() < 1e-12);
        let m = rho.to_matrix();
        let lowest = m.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
        prop_assert!(lowest >= -1e-8);
    }

    #[test]
    fn depolarizing_composes_multiplicatively(q1 in 0.0f64..=1.0, q2 in 0.0f64..=1.0, p in pauli_string(3), s in any::<u64>()) {
        let mut rng = seed::stream(s, &[]);
        let rho = MixedState::from_pure(&random_state(3, &mut rng)).unwrap();
        let target = rng.gen_range(0..3);
        let mut twice = rho.clone();
        twice.depolarize_qubit(q1, target).unwrap();
        twice.depolarize_qubit(q2, target).unwrap();
        let mut once = rho;
        once.depolarize_qubit(q1 * q2, target).unwrap();
        let d = expectation_mixed(&twice, &p).unwrap() - expectation_mixed(&once, &p).unwrap();
        prop_assert!(d.abs() < 1e-12);
    }

    #[test]
    fn adam_steps_respect_the_moment_ratio_bound(grads in prop::collection::vec(prop::collection::vec(-50.0f64..50.0, 4), 1..20), sparse in prop::collection::vec(any::<bool>(), 20)) {
        // |Δθ| <= lr·max(1, (1-β1)/sqrt(1-β2)); the larger factor is reached
        // only when a gradient follows a run of zeros, so mix those in
        let lr = 0.01;
        let bound = lr * f64::max(1.0, 0.1 / (1.0f64 - 0.999).sqrt()) * (1.0 + 1e-9);
        let mut opt = OptimizerState::new(OptimizerKind::adam(lr), 4).unwrap();
        let mut theta = vec![0.0; 4];
        for (g, zero) in grads.iter().zip(sparse) {
            let g = if zero { vec![0.0; 4] } else { g.clone() };
            let before = theta.clone();
            opt.step(&mut theta, &g).unwrap();
            for (a, b) in theta.iter().zip(&before) {
                prop_assert!((a - b).abs() <= bound);
            }
        }
    }

    #[test]
    fn adam_steps_stay_within_lr_for_stationary_gradients(g in prop::collection::vec(-50.0f64..50.0, 4), steps in 1usize..50) {
        let lr = 0.01;
        let mut opt = OptimizerState::new(OptimizerKind::adam(lr), 4).unwrap();
        let mut theta = vec![0.0; 4];
        for _ in 0..steps {
            let before = theta.clone();
            opt.step(&mut theta, &g).unwrap();
            for (a, b) in theta.iter().zip(&before) {
                prop_assert!((a - b).abs() <= lr * (1.0 + 1e-9));
            }
        }
    }

    #[test]
    fn grad_norm_is_additive_over_concatenation(u in prop::collection::vec(-5.0f64..5.0, 0..10), v in prop::collection::vec(-5.0f64..5.0, 0..10)) {
        let uv: Vec<f64> = u.iter().chain(&v).copied().collect();
        prop_assert!((grad_norm_sq(&uv) - grad_norm_sq(&u) - grad_norm_sq(&v)).abs() < 1e-9);
    }
}

#[test]
fn trailing_noise_never_increases_pauli_magnitude() {
    let mut rng = seed::stream(21, &[]);
    let circ = build_cl_qnn(3, 1, 1, InnerAnsatz::TensorRotations).unwrap();
    for _ in 0..50 {
        let theta = random_theta(circ.param_count(), &mut rng);
        let psi = circ.run(&theta, &PureState::zero(3).unwrap()).unwrap();
        let mut rho = MixedState::from_pure(&psi).unwrap();
        rho.depolarize_all(0.9).unwrap();
        for text in ["ZII", "XYI", "ZZZ", "IYX"] {
            let p: PauliString = text.parse().unwrap();
            assert!(expectation_mixed(&rho, &p).unwrap().abs() <= expectation_exact(&psi, &p).unwrap().abs() + 1e-12);
        }
    }
}

#[test]
fn pure_density_matrix_matches_state_expectation() {
    let mut rng = seed::stream(22, &[]);
    for _ in 0..30 {
        let psi = random_state(3, &mut rng);
        let rho = MixedState::from_pure(&psi).unwrap();
        let idx: Vec<u8> = (0..3).map(|_| rng.gen_range(0..4)).collect();
        let p = PauliString::from_indices(&idx).unwrap();
        assert!((expectation_mixed(&rho, &p).unwrap() - expectation_exact(&psi, &p).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn noiseless_channel_matches_pure_backend_on_random_circuits() {
    let mut rng = seed::stream(23, &[]);
    for n in 1..=6 {
        let circ = random_circuit(n, 30, &mut rng);
        let theta = random_theta(circ.param_count(), &mut rng);
        let psi = circ.run(&theta, &PureState::zero(n).unwrap()).unwrap();
        let rho = run_noisy(&circ, &theta, 1.0, &MixedState::zero(n).unwrap()).unwrap();
        for _ in 0..10 {
            let idx: Vec<u8> = (0..n).map(|_| rng.gen_range(0..4)).collect();
            let p = PauliString::from_indices(&idx).unwrap();
            assert!((expectation_mixed(&rho, &p).unwrap() - expectation_exact(&psi, &p).unwrap()).abs() < 1e-9);
        }
    }
}

#[test]
fn exact_gradient_mode_is_reproducible() {
    let mut rng = seed::stream(24, &[]);
    let circ = random_circuit(3, 10, &mut rng);
    let theta = random_theta(circ.param_count(), &mut rng);
    let eval = LossEvaluator::new(&circ, "ZZI".parse::<PauliString>().unwrap(), PureState::zero(3).unwrap()).unwrap();
    assert_eq!(eval.param_shift_grad(&theta, EvalMode::Exact).unwrap(), eval.param_shift_grad(&theta, EvalMode::Exact).unwrap());
}
