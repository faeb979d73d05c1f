//! Toy model `f(θ) = ⟨0…0| V(θ)† Z_0 V(θ) |0…0⟩`: scans of `f²` and
//! `‖∇f‖²` over qubit count, ansatz, initialization and noise.

use std::f64::consts::FRAC_PI_4;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{median, AnsatzKind, AnsatzShape, InitKind};
use crate::circuit::{init_haar_local, init_uniform, InnerAnsatz, ParamCircuit};
use crate::error::{invalid, Result};
use crate::gradients::{grad_norm_sq, EvalMode, LossEvaluator};
use crate::noise::{expectation_mixed, run_noisy, MixedState, MAX_NOISY_QUBITS};
use crate::pauli::{Pauli, PauliString};
use crate::seed;
use crate::state::{PureState, MAX_QUBITS};
use crate::theory::{mean_stderr, theorem1_bound, theorem2_bound};

pub fn toy_observable(n: usize) -> Result<PauliString> {
    PauliString::single(n, 0, Pauli::Z)
}

/// `⟨Z_0⟩` after running `circuit` on `|0…0⟩`.
pub fn toy_loss(circuit: &ParamCircuit, theta: &[f64]) -> Result<f64> {
    let n = circuit.num_qubits();
    LossEvaluator::new(circuit, toy_observable(n)?, PureState::zero(n)?)?.eval(theta)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToyScanConfig {
    pub n_min: usize,
    pub n_max: usize,
    pub ansatze: Vec<AnsatzKind>,
    pub rounds: usize,
    /// Depolarizing parameter; `None` runs the noiseless backend.
    pub noise: Option<f64>,
    pub init: InitKind,
    pub blocks: usize,
    pub s: usize,
    /// Layers of the HE ansatz inside each CL block.
    pub inner_layers: usize,
    /// Layers of the standalone HE comparison.
    pub he_layers: usize,
    /// Also compute `‖∇f‖²`; off for `f²`-only scans.
    pub compute_grad: bool,
    pub seed: u64,
}

impl Default for ToyScanConfig {
    fn default() -> Self {
        Self {
            n_min: 3,
            n_max: 8,
            ansatze: AnsatzKind::ALL.to_vec(),
            rounds: 5,
            noise: None,
            init: InitKind::Uniform,
            blocks: 2,
            s: 1,
            inner_layers: 5,
            he_layers: 10,
            compute_grad: true,
            seed: 0,
        }
    }
}

impl ToyScanConfig {
    pub fn shape(&self) -> AnsatzShape {
        AnsatzShape {
            blocks: self.blocks,
            s: self.s,
            inner: InnerAnsatz::HardwareEfficient { layers: self.inner_layers },
            he_layers: self.he_layers,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_min < 3 || self.n_max < self.n_min {
            return Err(invalid(format!("qubit range {}..={} invalid (need 3 <= n_min <= n_max)", self.n_min, self.n_max)));
        }
        let cap = if self.noise.is_some() { MAX_NOISY_QUBITS } else { MAX_QUBITS };
        if self.n_max > cap {
            return Err(invalid(format!("n_max={} exceeds the {cap}-qubit memory guard for this backend", self.n_max)));
        }
        if self.rounds == 0 {
            return Err(invalid("rounds must be at least 1"));
        }
        if self.ansatze.is_empty() {
            return Err(invalid("at least one ansatz is required"));
        }
        if let Some(q) = self.noise {
            if !(0.0..=1.0).contains(&q) {
                return Err(invalid(format!("noise parameter q={q} outside [0, 1]")));
            }
        }
        if self.init == InitKind::HaarLocal && self.ansatze.contains(&AnsatzKind::Random) {
            return Err(invalid("haar-local initialization needs R_X R_Y R_X triples; use cl or he"));
        }
        Ok(())
    }
}

/// One measured point (long format).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyPoint {
    pub n: usize,
    pub ansatz: AnsatzKind,
    pub init: InitKind,
    pub noise: Option<f64>,
    pub round: usize,
    pub f_sq: f64,
    pub grad_norm_sq: Option<f64>,
}

/// Aggregate over rounds for one `(n, ansatz)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyRow {
    pub n: usize,
    pub ansatz: AnsatzKind,
    pub rounds: usize,
    pub mean_f_sq: f64,
    pub stderr_f_sq: f64,
    pub median_f_sq: f64,
    pub mean_grad_norm_sq: Option<f64>,
    pub stderr_grad_norm_sq: Option<f64>,
    pub median_grad_norm_sq: Option<f64>,
    /// Theorem bounds, CL rows only.
    pub bound_f_sq: Option<f64>,
    pub bound_grad_norm_sq: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToyScan {
    pub points: Vec<ToyPoint>,
    pub rows: Vec<ToyRow>,
}

impl ToyScan {
    pub fn row(&self, n: usize, ansatz: AnsatzKind) -> Option<&ToyRow> {
        self.rows.iter().find(|r| r.n == n && r.ansatz == ansatz)
    }
}

fn noisy_value(circuit: &ParamCircuit, theta: &[f64], q: f64, obs: &PauliString) -> Result<f64> {
    let out = run_noisy(circuit, theta, q, &MixedState::zero(circuit.num_qubits())?)?;
    expectation_mixed(&out, obs)
}

/// Parameter-shift gradient through the noisy channel; the shift rule
/// still holds because the noise does not depend on `θ`.
fn noisy_grad(circuit: &ParamCircuit, theta: &[f64], q: f64, obs: &PauliString) -> Result<Vec<f64>> {
    let mut t = theta.to_vec();
    (0..theta.len())
        .map(|j| {
            t[j] = theta[j] + FRAC_PI_4;
            let up = noisy_value(circuit, &t, q, obs)?;
            t[j] = theta[j] - FRAC_PI_4;
            let down = noisy_value(circuit, &t, q, obs)?;
            t[j] = theta[j];
            Ok(up - down)
        })
        .collect()
}

fn measure_point(config: &ToyScanConfig, n: usize, ansatz: AnsatzKind, round: usize) -> Result<ToyPoint> {
    let path = [n as u64, ansatz.code(), round as u64];
    let circuit = config.shape().build(ansatz, n, &mut seed::stream(config.seed, &[path[0], path[1], path[2], 0]))?;
    let mut rng = seed::stream(config.seed, &[path[0], path[1], path[2], 1]);
    let theta = match config.init {
        InitKind::Uniform => init_uniform(circuit.param_count(), &mut rng),
        InitKind::HaarLocal => init_haar_local(&circuit, &mut rng)?,
    };
    let obs = toy_observable(n)?;
    let (f, grad) = match config.noise {
        None => {
            let eval = LossEvaluator::new(&circuit, obs, PureState::zero(n)?)?;
            let f = eval.eval(&theta)?;
            let g = if config.compute_grad {
                Some(grad_norm_sq(&eval.param_shift_grad(&theta, EvalMode::Exact)?))
            } else {
                None
            };
            (f, g)
        }
        Some(q) => {
            let f = noisy_value(&circuit, &theta, q, &obs)?;
            let g = if config.compute_grad { Some(grad_norm_sq(&noisy_grad(&circuit, &theta, q, &obs)?)) } else { None };
            (f, g)
        }
    };
    Ok(ToyPoint { n, ansatz, init: config.init, noise: config.noise, round, f_sq: f * f, grad_norm_sq: grad })
}

/// For each `n` and ansatz, `rounds` fresh parameter draws (and, for Random,
/// fresh structures). Points are computed in parallel but every point uses
/// streams derived from `(seed, n, ansatz, round)`, so output order and
/// values do not depend on scheduling.
pub fn toy_scan(config: &ToyScanConfig) -> Result<ToyScan> {
    config.validate()?;
    let jobs: Vec<(usize, AnsatzKind, usize)> = (config.n_min..=config.n_max)
        .flat_map(|n| config.ansatze.iter().flat_map(move |&a| (0..config.rounds).map(move |r| (n, a, r))))
        .collect();
    let points = jobs
        .par_iter()
        .map(|&(n, a, r)| measure_point(config, n, a, r))
        .collect::<Result<Vec<_>>>()?;
    let rows = points
        .chunks(config.rounds)
        .map(|chunk| aggregate(config, chunk))
        .collect::<Result<Vec<_>>>()?;
    Ok(ToyScan { points, rows })
}

fn aggregate(config: &ToyScanConfig, chunk: &[ToyPoint]) -> Result<ToyRow> {
    let (n, ansatz) = (chunk[0].n, chunk[0].ansatz);
    let f: Vec<f64> = chunk.iter().map(|p| p.f_sq).collect();
    let g: Option<Vec<f64>> = chunk.iter().map(|p| p.grad_norm_sq).collect();
    let (mean_f_sq, stderr_f_sq) = mean_stderr(&f);
    let grad_stats = g.as_ref().map(|g| (mean_stderr(g), median(g)));
    let (bound_f_sq, bound_grad_norm_sq) = if ansatz == AnsatzKind::Cl && config.noise.is_none() {
        let zero = PureState::zero(n)?;
        let obs = toy_observable(n)?;
        (
            Some(theorem1_bound(config.blocks, config.s, &zero, &obs)?),
            Some(theorem2_bound(config.blocks, config.s, &zero, &obs)?),
        )
    } else {
        (None, None)
    };
    Ok(ToyRow {
        n,
        ansatz,
        rounds: chunk.len(),
        mean_f_sq,
        stderr_f_sq,
        median_f_sq: median(&f),
        mean_grad_norm_sq: grad_stats.map(|((m, _), _)| m),
        stderr_grad_norm_sq: grad_stats.map(|((_, s), _)| s),
        median_grad_norm_sq: grad_stats.map(|(_, med)| med),
        bound_f_sq,
        bound_grad_norm_sq,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Angle, GateOp};
    use crate::state::Axis;

    #[test]
    fn toy_loss_examples() {
        assert_eq!(toy_loss(&ParamCircuit::empty(3).unwrap(), &[]).unwrap(), 1.0);
        let c = ParamCircuit::from_parts(
            3,
            vec![GateOp::Rotation { axis: Axis::X, qubit: 0, angle: Angle::Slot(0) }],
            vec![1],
        )
        .unwrap();
        for t in [0.0, 0.3, 1.1, 2.9] {
            assert!((toy_loss(&c, &[t]).unwrap() - (2.0 * t).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn scan_row_count_and_determinism() {
        let cfg = ToyScanConfig { n_min: 3, n_max: 4, ansatze: vec![AnsatzKind::Cl], rounds: 1, ..Default::default() };
        let a = toy_scan(&cfg).unwrap();
        assert_eq!(a.rows.len(), 2);
        assert_eq!(a, toy_scan(&cfg).unwrap());
    }

    #[test]
    fn noiseless_channel_matches_pure_rows() {
        let base = ToyScanConfig { n_min: 3, n_max: 3, rounds: 3, ..Default::default() };
        let pure = toy_scan(&base).unwrap();
        let noisy = toy_scan(&ToyScanConfig { noise: Some(1.0), ..base }).unwrap();
        for (p, q) in pure.points.iter().zip(&noisy.points) {
            assert!((p.f_sq - q.f_sq).abs() < 1e-10);
            assert!((p.grad_norm_sq.unwrap() - q.grad_norm_sq.unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn guards() {
        let bad = [
            ToyScanConfig { n_min: 2, ..Default::default() },
            ToyScanConfig { n_max: 23, ..Default::default() },
            ToyScanConfig { n_max: 11, noise: Some(0.99), ..Default::default() },
            ToyScanConfig { rounds: 0, ..Default::default() },
            ToyScanConfig { init: InitKind::HaarLocal, ..Default::default() },
        ];
        for cfg in bad {
            assert!(toy_scan(&cfg).is_err(), "{cfg:?}");
        }
    }
}
