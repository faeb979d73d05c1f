//! Loss evaluation and parameter-shift gradients.
//!
//! For a gate `exp(-iθG)` with Pauli `G`, `∂f/∂θ = f(θ + π/4) - f(θ - π/4)`
//! exactly. Shot-mode gradients estimate each of the `2P` shifted losses
//! independently with its own random stream, keyed by `(seed, slot, sign)`.

use std::f64::consts::FRAC_PI_4;

use rand::Rng;

use crate::circuit::{GateOp, ParamCircuit};
use crate::error::{Error, Result};
use crate::pauli::{expectation_exact, expectation_shots, Hamiltonian, PauliString};
use crate::seed;
use crate::state::PureState;

#[derive(Debug, Clone, PartialEq)]
pub enum Observable {
    Pauli(PauliString),
    Hamiltonian(Hamiltonian),
}

impl From<PauliString> for Observable {
    fn from(p: PauliString) -> Self {
        Observable::Pauli(p)
    }
}

impl From<Hamiltonian> for Observable {
    fn from(h: Hamiltonian) -> Self {
        Observable::Hamiltonian(h)
    }
}

impl Observable {
    pub fn num_qubits(&self) -> usize {
        match self {
            Observable::Pauli(p) => p.num_qubits(),
            Observable::Hamiltonian(h) => h.num_qubits(),
        }
    }

    pub fn support_mask(&self) -> usize {
        match self {
            Observable::Pauli(p) => p.support_mask(),
            Observable::Hamiltonian(h) => h.terms().iter().fold(0, |m, (_, p)| m | p.support_mask()),
        }
    }

    pub fn exact(&self, state: &PureState) -> Result<f64> {
        match self {
            Observable::Pauli(p) => expectation_exact(state, p),
            Observable::Hamiltonian(h) => h.expectation::<seed::StreamRng>(state, None),
        }
    }

    pub fn shots<R: Rng + ?Sized>(&self, state: &PureState, shots: usize, rng: &mut R) -> Result<f64> {
        match self {
            Observable::Pauli(p) => expectation_shots(state, p, shots, rng),
            Observable::Hamiltonian(h) => h.expectation(state, Some((shots, rng))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    Exact,
    /// `shots` samples per Pauli term; streams derived from `seed`.
    Shots { shots: usize, seed: u64 },
}

/// `f(θ) = ⟨ψ_in| V(θ)† O V(θ) |ψ_in⟩` for a fixed circuit, observable and
/// input. Ops outside the observable's backward light cone are skipped; they
/// commute past the measurement and cannot change the result.
#[derive(Debug, Clone)]
pub struct LossEvaluator<'c> {
    circuit: &'c ParamCircuit,
    observable: Observable,
    input: PureState,
    live: Vec<bool>,
}

impl<'c> LossEvaluator<'c> {
    pub fn new(circuit: &'c ParamCircuit, observable: impl Into<Observable>, input: PureState) -> Result<Self> {
        let observable = observable.into();
        let n = circuit.num_qubits();
        for got in [observable.num_qubits(), input.num_qubits()] {
            if got != n {
                return Err(Error::DimensionMismatch { expected: n, got });
            }
        }
        let live = circuit.backward_lightcone(observable.support_mask());
        Ok(Self { circuit, observable, input, live })
    }

    pub fn circuit(&self) -> &ParamCircuit {
        self.circuit
    }

    pub fn observable(&self) -> &Observable {
        &self.observable
    }

    pub fn input(&self) -> &PureState {
        &self.input
    }

    /// Same circuit and observable, different input state.
    pub fn with_input(&self, input: PureState) -> Result<Self> {
        if input.num_qubits() != self.circuit.num_qubits() {
            return Err(Error::DimensionMismatch { expected: self.circuit.num_qubits(), got: input.num_qubits() });
        }
        Ok(Self { input, ..self.clone() })
    }

    /// Full (unpruned) output state `V(θ)|ψ_in⟩`.
    pub fn output_state(&self, theta: &[f64]) -> Result<PureState> {
        self.circuit.run(theta, &self.input)
    }

    fn pruned_output(&self, theta: &[f64]) -> Result<PureState> {
        self.circuit.check_inputs(theta, self.input.num_qubits())?;
        let mut s = self.input.clone();
        self.apply_live(theta, 0, &mut s);
        Ok(s)
    }

    fn apply_live(&self, theta: &[f64], from: usize, state: &mut PureState) {
        let amps = state.amplitudes_mut();
        for (op, _) in self.circuit.ops()[from..].iter().zip(&self.live[from..]).filter(|(_, &l)| l) {
            op.apply_raw(amps, theta);
        }
    }

    pub fn eval(&self, theta: &[f64]) -> Result<f64> {
        self.observable.exact(&self.pruned_output(theta)?)
    }

    pub fn eval_shots<R: Rng + ?Sized>(&self, theta: &[f64], shots: usize, rng: &mut R) -> Result<f64> {
        self.observable.shots(&self.pruned_output(theta)?, shots, rng)
    }

    pub fn eval_with(&self, theta: &[f64], mode: EvalMode) -> Result<f64> {
        match mode {
            EvalMode::Exact => self.eval(theta),
            EvalMode::Shots { shots, seed } => self.eval_shots(theta, shots, &mut seed::stream(seed, &[])),
        }
    }

    fn measure(&self, state: &PureState, mode: EvalMode, slot: usize, sign: u64) -> Result<f64> {
        match mode {
            EvalMode::Exact => self.observable.exact(state),
            EvalMode::Shots { shots, seed } => {
                self.observable.shots(state, shots, &mut seed::stream(seed, &[slot as u64, sign]))
            }
        }
    }

    /// Parameter-shift gradient. The sweep walks the ops once, carrying the
    /// prefix state, so each shifted loss only re-simulates its suffix.
    pub fn param_shift_grad(&self, theta: &[f64], mode: EvalMode) -> Result<Vec<f64>> {
        self.circuit.check_inputs(theta, self.input.num_qubits())?;
        let p = self.circuit.param_count();
        let mut grad = vec![0.0; p];
        if p == 0 {
            return Ok(grad);
        }
        let ops = self.circuit.ops();
        let mut shifted = theta.to_vec();
        let mut prefix = self.input.clone();
        let mut base_output: Option<PureState> = None;
        for (i, op) in ops.iter().enumerate() {
            if let Some(slot) = op.slot() {
                if self.live[i] {
                    let mut f = [0.0; 2];
                    for (k, delta) in [FRAC_PI_4, -FRAC_PI_4].into_iter().enumerate() {
                        shifted[slot] = theta[slot] + delta;
                        let mut s = prefix.clone();
                        self.apply_live(&shifted, i, &mut s);
                        f[k] = self.measure(&s, mode, slot, k as u64)?;
                    }
                    shifted[slot] = theta[slot];
                    grad[slot] = f[0] - f[1];
                } else if let EvalMode::Shots { .. } = mode {
                    // Both shifted circuits prepare the unshifted output
                    // state; only the shot noise differs.
                    if base_output.is_none() {
                        base_output = Some(self.pruned_output(theta)?);
                    }
                    let out = base_output.as_ref().expect("set above");
                    grad[slot] = self.measure(out, mode, slot, 0)? - self.measure(out, mode, slot, 1)?;
                }
            }
            if self.live[i] {
                op.apply_raw(prefix.amplitudes_mut(), theta);
            }
        }
        Ok(grad)
    }

    /// Central differences `(f(θ + h e_j) - f(θ - h e_j)) / 2h`, exact mode.
    pub fn finite_diff_grad(&self, theta: &[f64], h: f64) -> Result<Vec<f64>> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidArgument(format!("finite-difference step must be positive, got {h}")));
        }
        self.circuit.check_inputs(theta, self.input.num_qubits())?;
        let mut t = theta.to_vec();
        (0..theta.len())
            .map(|j| {
                t[j] = theta[j] + h;
                let up = self.eval(&t)?;
                t[j] = theta[j] - h;
                let down = self.eval(&t)?;
                t[j] = theta[j];
                Ok((up - down) / (2.0 * h))
            })
            .collect()
    }
}

/// `Σ g_j²`
pub fn grad_norm_sq(g: &[f64]) -> f64 {
    g.iter().map(|x| x * x).sum()
}

/// Whether every parameterized op is a Pauli rotation (the only kind this
/// crate builds); kept as an explicit check for externally loaded circuits.
pub fn supports_param_shift(circuit: &ParamCircuit) -> bool {
    circuit.ops().iter().all(|op| op.slot().is_none() || matches!(op, GateOp::Rotation { .. }))
}
