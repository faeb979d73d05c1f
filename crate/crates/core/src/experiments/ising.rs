//! Variational ground-state search for the transverse-field Ising ring.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{AnsatzKind, AnsatzShape};
use crate::circuit::{init_uniform, GateBudget, InnerAnsatz, ParamCircuit};
use crate::error::{invalid, Result};
use crate::gradients::{EvalMode, LossEvaluator};
use crate::optim::{train, Objective, OptimizerKind, RunRecord, TrainConfig, TrainStatus};
use crate::pauli::{ising_hamiltonian, Hamiltonian};
use crate::seed;
use crate::state::{PureState, C64};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsingConfig {
    pub n: usize,
    pub blocks: usize,
    pub ansatz: AnsatzKind,
    pub train: TrainConfig,
}

impl IsingConfig {
    /// Desk-scale default: N=10, L=4, Adam (lr 0.01), 100 shots per term,
    /// 200 iterations.
    pub fn desk(ansatz: AnsatzKind, optimizer: OptimizerKind, seed: u64) -> Self {
        Self {
            n: 10,
            blocks: 4,
            ansatz,
            train: TrainConfig { iterations: 200, shots: 100, batch_size: None, seed, optimizer },
        }
    }

    /// N=16, L=6.
    pub fn full(ansatz: AnsatzKind, optimizer: OptimizerKind, seed: u64) -> Self {
        Self { n: 16, blocks: 6, ..Self::desk(ansatz, optimizer, seed) }
    }

    fn shape(&self) -> AnsatzShape {
        AnsatzShape { blocks: self.blocks, s: 1, inner: InnerAnsatz::TensorRotations, he_layers: 0 }
    }

    /// CL with `R_X R_Y R_X` on the remaining qubits, or a Random circuit
    /// with the same gate counts.
    pub fn circuit(&self) -> Result<ParamCircuit> {
        if self.n < 2 {
            return Err(invalid(format!("Ising experiment needs N >= 2, got {}", self.n)));
        }
        if self.ansatz == AnsatzKind::He {
            return Err(invalid("Ising experiment compares cl and random ansatze only"));
        }
        self.shape().build(self.ansatz, self.n, &mut seed::stream(self.train.seed, &[0]))
    }
}

struct IsingObjective<'c> {
    eval: LossEvaluator<'c>,
    shots: usize,
}

impl Objective for IsingObjective<'_> {
    fn param_count(&self) -> usize {
        self.eval.circuit().param_count()
    }

    fn loss(&self, theta: &[f64], _iteration: usize, seed_value: u64) -> Result<f64> {
        self.eval.eval_shots(theta, self.shots, &mut seed::stream(seed_value, &[]))
    }

    fn gradient(&self, theta: &[f64], _iteration: usize, seed_value: u64) -> Result<Vec<f64>> {
        self.eval.param_shift_grad(theta, EvalMode::Shots { shots: self.shots, seed: seed_value })
    }

    fn exact_loss(&self, theta: &[f64]) -> Result<Option<f64>> {
        self.eval.eval(theta).map(Some)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsingRun {
    pub gate_budget: GateBudget,
    pub param_count: usize,
    pub records: Vec<RunRecord>,
    pub status: TrainStatus,
}

/// Trains from a uniform initialization; each record carries the shot
/// loss, the gradient norm and the exact loss at that iterate.
pub fn ising_experiment(config: &IsingConfig) -> Result<IsingRun> {
    let circuit = config.circuit()?;
    let h = ising_hamiltonian(config.n)?;
    let eval = LossEvaluator::new(&circuit, h, PureState::zero(config.n)?)?;
    let objective = IsingObjective { eval, shots: config.train.shots };
    let theta0 = init_uniform(circuit.param_count(), &mut seed::stream(config.train.seed, &[1]));
    let train_cfg = TrainConfig { seed: seed::derive(config.train.seed, &[2]), ..config.train };
    let outcome = train(&objective, &theta0, &train_cfg)?;
    Ok(IsingRun {
        gate_budget: circuit.gate_budget(),
        param_count: circuit.param_count(),
        records: outcome.records,
        status: outcome.status,
    })
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn axpy(y: &mut [C64], a: C64, x: &[C64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Smallest eigenvalue of `h` by Lanczos with full reorthogonalization.
pub fn ground_energy(h: &Hamiltonian) -> Result<f64> {
    let dim = 1usize << h.num_qubits();
    if h.terms().is_empty() {
        return Ok(0.0);
    }
    let max_krylov = dim.min(300);
    let mut rng = seed::stream(0x15_1A9, &[h.num_qubits() as u64]);
    let mut v: Vec<C64> = (0..dim).map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
    let norm = dot(&v, &v).re.sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(max_krylov);
    let mut alpha = Vec::with_capacity(max_krylov);
    let mut beta: Vec<f64> = Vec::with_capacity(max_krylov);
    loop {
        let mut w = h.apply_raw(&v);
        let a = dot(&v, &w).re;
        basis.push(v);
        alpha.push(a);
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                axpy(&mut w, -c, b);
            }
        }
        let k = alpha.len();
        let t = DMatrix::from_fn(k, k, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j {
                beta[i]
            } else if j + 1 == i {
                beta[j]
            } else {
                0.0
            }
        });
        let b = dot(&w, &w).re.sqrt();
        let eig = SymmetricEigen::new(t);
        let (idx, lowest) = eig
            .eigenvalues
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, e)| if e < acc.1 { (i, e) } else { acc });
        // Ritz residual ‖H y - λ y‖ = β_k |last component of the Ritz vector|
        let residual = b * eig.eigenvectors[(k - 1, idx)].abs();
        if b < 1e-12 || k == max_krylov || residual < 1e-11 {
            return Ok(lowest);
        }
        beta.push(b);
        v = w.into_iter().map(|x| x / b).collect();
    }
}

/// Dense `2^N × 2^N` matrix of `h`, for oracles at small N.
pub fn dense_matrix(h: &Hamiltonian) -> DMatrix<C64> {
    let dim = 1usize << h.num_qubits();
    let mut m = DMatrix::zeros(dim, dim);
    let mut e = vec![C64::new(0.0, 0.0); dim];
    for c in 0..dim {
        e[c] = C64::new(1.0, 0.0);
        for (r, x) in h.apply_raw(&e).into_iter().enumerate() {
            m[(r, c)] = x;
        }
        e[c] = C64::new(0.0, 0.0);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_site_ground_energy() {
        let e = ground_energy(&ising_hamiltonian(2).unwrap()).unwrap();
        assert!((e + 2f64.sqrt()).abs() < 1e-10, "{e}");
    }

    #[test]
    fn lanczos_matches_dense_eigensolve() {
        for n in 3..=6 {
            let h = ising_hamiltonian(n).unwrap();
            let dense = dense_matrix(&h);
            let real = DMatrix::from_fn(dense.nrows(), dense.ncols(), |r, c| dense[(r, c)].re);
            let exact = SymmetricEigen::new(real).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
            let e = ground_energy(&h).unwrap();
            assert!((e - exact).abs() < 1e-10, "n={n}: {e} vs {exact}");
        }
    }

    #[test]
    fn short_run_is_deterministic_and_bounded() {
        let mut cfg = IsingConfig::desk(AnsatzKind::Cl, OptimizerKind::adam(0.05), 3);
        cfg.n = 4;
        cfg.blocks = 2;
        cfg.train.iterations = 5;
        let a = ising_experiment(&cfg).unwrap();
        assert_eq!(a.records.len(), 5);
        assert_eq!(a, ising_experiment(&cfg).unwrap());
        let e0 = ground_energy(&ising_hamiltonian(4).unwrap()).unwrap();
        assert!(a.records.iter().all(|r| r.exact_loss.unwrap() >= e0 - 1e-9));
    }

    #[test]
    fn random_matches_cl_budget() {
        let cl = IsingConfig::desk(AnsatzKind::Cl, OptimizerKind::sgd(0.15), 1);
        let rnd = IsingConfig { ansatz: AnsatzKind::Random, ..cl.clone() };
        assert_eq!(cl.circuit().unwrap().gate_budget(), rnd.circuit().unwrap().gate_budget());
        assert!(IsingConfig { ansatz: AnsatzKind::He, ..cl }.circuit().is_err());
    }
}
