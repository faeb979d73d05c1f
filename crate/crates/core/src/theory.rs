//! Numerical checks of the expectation identities and lower bounds for
//! controlled-layer circuits.

use std::f64::consts::{FRAC_PI_4, TAU};

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{haar_unitary, ParamCircuit};
use crate::error::{invalid, Error, Result};
use crate::gradients::{grad_norm_sq, EvalMode, LossEvaluator};
use crate::noise::{expectation_mixed, MixedState};
use crate::pauli::{expectation_exact, PauliString};
use crate::seed;
use crate::state::{Axis, PureState, SingleQubitUnitary, C64};

pub type CMatrix = DMatrix<C64>;

const MATRIX_TOL: f64 = 1e-12;

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn check_hermitian(m: &CMatrix, what: &str) -> Result<()> {
    if !m.is_square() {
        return Err(invalid(format!("{what} is not square")));
    }
    let dev = max_abs(&(m - m.adjoint()));
    if dev > 1e-10 {
        return Err(Error::NotHermitian(dev));
    }
    Ok(())
}

fn check_dims(dim: usize, ms: &[&CMatrix]) -> Result<()> {
    for m in ms {
        if m.nrows() != dim || m.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: m.nrows() });
        }
    }
    Ok(())
}

fn tr(a: &CMatrix, b: &CMatrix) -> C64 {
    // Tr[AB] without forming the product
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommutantSplit {
    /// Part commuting with `G`.
    pub o1: CMatrix,
    /// Part anti-commuting with `G`.
    pub o2: CMatrix,
}

/// `O1 = (O + GOG)/2`, `O2 = (O - GOG)/2`.
pub fn commutant_split(o: &CMatrix, g: &CMatrix) -> Result<CommutantSplit> {
    check_hermitian(o, "observable")?;
    check_hermitian(g, "generator")?;
    check_dims(o.nrows(), &[g])?;
    let dev = max_abs(&(g * g - CMatrix::identity(g.nrows(), g.ncols())));
    if dev > MATRIX_TOL {
        return Err(invalid(format!("generator is not involutory: |G² - I| = {dev:e}")));
    }
    let gog = g * o * g;
    let half = C64::new(0.5, 0.0);
    Ok(CommutantSplit { o1: (o + &gog) * half, o2: (o - &gog) * half })
}

/// `W(θ) = cos θ I - i sin θ G`
fn rotation_matrix(g: &CMatrix, theta: f64) -> CMatrix {
    let (s, c) = theta.sin_cos();
    CMatrix::identity(g.nrows(), g.ncols()) * C64::new(c, 0.0) - g * C64::new(0.0, s)
}

fn rotated_expectation(o: &CMatrix, g: &CMatrix, rho: &CMatrix, theta: f64) -> f64 {
    let w = rotation_matrix(g, theta);
    tr(o, &(&w * rho * w.adjoint())).re
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub deviation: f64,
}

impl LemmaCheck {
    fn new(lhs: f64, rhs: f64) -> Self {
        Self { lhs, rhs, deviation: (lhs - rhs).abs() }
    }
}

/// Uniform trapezoid rule on `[0, 2π)`; exact for trigonometric
/// polynomials of degree below `nodes`.
fn periodic_mean(nodes: usize, f: impl Fn(f64) -> f64) -> f64 {
    (0..nodes).map(|k| f(TAU * k as f64 / nodes as f64)).sum::<f64>() / nodes as f64
}

fn check_nodes(nodes: usize) -> Result<()> {
    if nodes == 0 {
        return Err(invalid("quadrature needs at least one node"));
    }
    Ok(())
}

/// `E_θ Tr[O W ρ1 W†] Tr[O W ρ2 W†]` by quadrature against its closed form.
/// The integrand has degree 4 in θ, so any `nodes >= 5` is exact; fewer
/// nodes are accepted and simply alias.
pub fn lemma2_check(o: &CMatrix, g: &CMatrix, rho1: &CMatrix, rho2: &CMatrix, nodes: usize) -> Result<LemmaCheck> {
    check_nodes(nodes)?;
    check_hermitian(rho1, "rho1")?;
    check_hermitian(rho2, "rho2")?;
    check_dims(o.nrows(), &[rho1, rho2])?;
    let split = commutant_split(o, g)?;
    let lhs = periodic_mean(nodes, |t| rotated_expectation(o, g, rho1, t) * rotated_expectation(o, g, rho2, t));
    let io2g = &split.o2 * g * C64::new(0.0, 1.0);
    let rhs = tr(&split.o1, rho1).re * tr(&split.o1, rho2).re
        + 0.5 * tr(&split.o2, rho1).re * tr(&split.o2, rho2).re
        + 0.5 * tr(&io2g, rho1).re * tr(&io2g, rho2).re;
    Ok(LemmaCheck::new(lhs, rhs))
}

/// `E_θ (Tr[O W+ ρ W+†] - Tr[O W- ρ W-†])²` with `W± = W(θ ± π/4)`.
pub fn lemma3_check(o: &CMatrix, g: &CMatrix, rho: &CMatrix, nodes: usize) -> Result<LemmaCheck> {
    check_nodes(nodes)?;
    check_hermitian(rho, "rho")?;
    check_dims(o.nrows(), &[rho])?;
    let split = commutant_split(o, g)?;
    let lhs = periodic_mean(nodes, |t| {
        let d = rotated_expectation(o, g, rho, t + FRAC_PI_4) - rotated_expectation(o, g, rho, t - FRAC_PI_4);
        d * d
    });
    let io2g = &split.o2 * g * C64::new(0.0, 1.0);
    let rhs = 2.0 * tr(&split.o2, rho).re.powi(2) + 2.0 * tr(&io2g, rho).re.powi(2);
    Ok(LemmaCheck::new(lhs, rhs))
}

pub fn pauli_matrix(axis: Option<Axis>) -> CMatrix {
    let m = match axis {
        None => return CMatrix::identity(2, 2),
        Some(a) => *SingleQubitUnitary::pauli(a).matrix(),
    };
    CMatrix::from_fn(2, 2, |r, c| m[r][c])
}

/// `(A + A†)/2` for a complex Ginibre `A`.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let a = ginibre(dim, rng);
    (&a + a.adjoint()) * C64::new(0.5, 0.0)
}

/// `AA† / Tr[AA†]`: full-rank density matrix.
pub fn random_density<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let a = ginibre(dim, rng);
    let m = &a * a.adjoint();
    let t = m.trace();
    m / t
}

fn ginibre<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(dim, dim, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

#[derive(Debug, Clone)]
pub struct LemmaInstance {
    pub o: CMatrix,
    pub g: CMatrix,
    pub rho1: CMatrix,
    pub rho2: CMatrix,
}

/// Random instance: `dim = 2` uses a random Pauli `G`; `dim = 4` uses
/// `G = P ⊗ I`.
pub fn random_lemma_instance<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<LemmaInstance> {
    let p = pauli_matrix(Some(Axis::ALL[rng.gen_range(0..3)]));
    let g = match dim {
        2 => p,
        4 => p.kronecker(&CMatrix::identity(2, 2)),
        _ => return Err(invalid(format!("lemma instances are 2x2 or 4x4, got {dim}"))),
    };
    Ok(LemmaInstance { o: random_hermitian(dim, rng), g, rho1: random_density(dim, rng), rho2: random_density(dim, rng) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaSuiteReport {
    pub trials: usize,
    pub nodes: usize,
    pub max_deviation_lemma2: f64,
    pub max_deviation_lemma3: f64,
}

impl LemmaSuiteReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.max_deviation_lemma2 < tol && self.max_deviation_lemma3 < tol
    }
}

/// `trials` random instances at each of 2x2 and 4x4.
pub fn lemma_suite(trials: usize, nodes: usize, seed_value: u64) -> Result<LemmaSuiteReport> {
    let mut report = LemmaSuiteReport { trials, nodes, max_deviation_lemma2: 0.0, max_deviation_lemma3: 0.0 };
    for (d, dim) in [2usize, 4].into_iter().enumerate() {
        for t in 0..trials {
            let mut rng = seed::stream(seed_value, &[d as u64, t as u64]);
            let inst = random_lemma_instance(dim, &mut rng)?;
            let l2 = lemma2_check(&inst.o, &inst.g, &inst.rho1, &inst.rho2, nodes)?;
            let l3 = lemma3_check(&inst.o, &inst.g, &inst.rho1, nodes)?;
            report.max_deviation_lemma2 = report.max_deviation_lemma2.max(l2.deviation);
            report.max_deviation_lemma3 = report.max_deviation_lemma3.max(l3.deviation);
        }
    }
    Ok(report)
}

/// States whose Pauli expectations can be evaluated exactly.
pub trait PauliExpectation {
    fn num_qubits(&self) -> usize;
    fn pauli_expectation(&self, p: &PauliString) -> Result<f64>;
}

impl PauliExpectation for PureState {
    fn num_qubits(&self) -> usize {
        PureState::num_qubits(self)
    }

    fn pauli_expectation(&self, p: &PauliString) -> Result<f64> {
        expectation_exact(self, p)
    }
}

impl PauliExpectation for MixedState {
    fn num_qubits(&self) -> usize {
        MixedState::num_qubits(self)
    }

    fn pauli_expectation(&self, p: &PauliString) -> Result<f64> {
        expectation_mixed(self, p)
    }
}

fn bound_prefactor(s: usize, rho_in: &impl PauliExpectation, sigma: &PauliString) -> Result<f64> {
    if sigma.locality() != s {
        return Err(invalid(format!("observable {sigma} has locality {}, expected S={s}", sigma.locality())));
    }
    if sigma.support_mask() >> s != 0 {
        return Err(invalid(format!("observable {sigma} must be supported on qubits 0..{s}")));
    }
    Ok(rho_in.pauli_expectation(&sigma.three_bar())?.powi(2))
}

fn eight_pow(l: usize, s: usize) -> f64 {
    8f64.powi((l * s) as i32)
}

/// `(Tr[σ_{3|i} ρ_in])² / 8^{LS}`
pub fn theorem1_bound(l: usize, s: usize, rho_in: &impl PauliExpectation, sigma: &PauliString) -> Result<f64> {
    Ok(bound_prefactor(s, rho_in, sigma)? / eight_pow(l, s))
}

/// `12(L-1)S (Tr[σ_{3|i} ρ_in])² / 8^{LS}`
pub fn theorem2_bound(l: usize, s: usize, rho_in: &impl PauliExpectation, sigma: &PauliString) -> Result<f64> {
    let blocks_before_last = l.saturating_sub(1) as f64;
    Ok(12.0 * blocks_before_last * s as f64 * bound_prefactor(s, rho_in, sigma)? / eight_pow(l, s))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub estimate: f64,
    pub stderr: f64,
    pub bound: f64,
    pub samples: usize,
    /// `estimate >= bound - 3·stderr`; a Monte Carlo mean can only show a
    /// lower bound is not violated, so the check is one-sided.
    pub passed: bool,
    /// For gradient reports: mean of the squared partial derivatives over
    /// the head rotations of blocks `1..L-1`, which the bound also covers.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub restricted_estimate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub restricted_stderr: Option<f64>,
}

/// Sample mean and standard error of the mean.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

fn report(values: &[f64], bound: f64) -> BoundReport {
    let (estimate, stderr) = mean_stderr(values);
    BoundReport {
        estimate,
        stderr,
        bound,
        samples: values.len(),
        passed: estimate >= bound - 3.0 * stderr,
        restricted_estimate: None,
        restricted_stderr: None,
    }
}

/// `(L, S)` for the bound: from the CL layout, or `(0, locality)` for an
/// empty circuit.
fn cl_shape(circuit: &ParamCircuit, sigma: &PauliString) -> Result<(usize, usize)> {
    match circuit.cl_layout() {
        Some(layout) => Ok((layout.blocks, layout.s)),
        None if circuit.ops().is_empty() => Ok((0, sigma.locality())),
        None => Err(invalid("bound checks need a controlled-layer circuit")),
    }
}

fn check_samples(samples: usize) -> Result<()> {
    if samples == 0 {
        return Err(invalid("Monte Carlo needs at least one sample"));
    }
    Ok(())
}

fn uniform_theta(p: usize, master: u64, sample: usize) -> Vec<f64> {
    let mut rng = seed::stream(master, &[sample as u64]);
    (0..p).map(|_| rng.gen_range(0.0..TAU)).collect()
}

/// Monte Carlo `E_θ f²` over i.i.d. uniform angles, against the Theorem 1
/// bound. Sample `j` uses the stream derived from `(seed, j)`.
pub fn mc_expected_f_sq(
    circuit: &ParamCircuit,
    sigma: &PauliString,
    input: &PureState,
    samples: usize,
    seed_value: u64,
) -> Result<BoundReport> {
    check_samples(samples)?;
    let (l, s) = cl_shape(circuit, sigma)?;
    let bound = theorem1_bound(l, s, input, sigma)?;
    let eval = LossEvaluator::new(circuit, sigma.clone(), input.clone())?;
    let p = circuit.param_count();
    let values = (0..samples)
        .into_par_iter()
        .map(|j| eval.eval(&uniform_theta(p, seed_value, j)).map(|f| f * f))
        .collect::<Result<Vec<_>>>()?;
    Ok(report(&values, bound))
}

/// Monte Carlo `E_θ ‖∇f‖²` (exact parameter-shift gradients) against the
/// Theorem 2 bound.
pub fn mc_expected_grad_norm_sq(
    circuit: &ParamCircuit,
    sigma: &PauliString,
    input: &PureState,
    samples: usize,
    seed_value: u64,
) -> Result<BoundReport> {
    check_samples(samples)?;
    let (l, s) = cl_shape(circuit, sigma)?;
    let bound = theorem2_bound(l, s, input, sigma)?;
    let eval = LossEvaluator::new(circuit, sigma.clone(), input.clone())?;
    let p = circuit.param_count();
    let restricted: Vec<usize> = circuit
        .cl_layout()
        .map(|layout| layout.head_slots.iter().take(l.saturating_sub(1)).flatten().copied().collect())
        .unwrap_or_default();
    let pairs = (0..samples)
        .into_par_iter()
        .map(|j| {
            let g = eval.param_shift_grad(&uniform_theta(p, seed_value, j), EvalMode::Exact)?;
            let part: f64 = restricted.iter().map(|&k| g[k] * g[k]).sum();
            Ok((grad_norm_sq(&g), part))
        })
        .collect::<Result<Vec<_>>>()?;
    let (full, part): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let mut r = report(&full, bound);
    if circuit.cl_layout().is_some() {
        let (m, se) = mean_stderr(&part);
        r.restricted_estimate = Some(m);
        r.restricted_stderr = Some(se);
    }
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlochMode {
    /// `R_Y(θ2) R_X(θ1)|0⟩` with uniform angles.
    UniformAngles,
    /// Haar-random single-qubit unitary applied to `|0⟩`.
    HaarLocal,
}

impl std::str::FromStr for BlochMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" | "uniform-angles" => Ok(Self::UniformAngles),
            "haar" | "haar-local" => Ok(Self::HaarLocal),
            other => Err(invalid(format!("unknown Bloch sampling mode '{other}'"))),
        }
    }
}

fn bloch_vector(v: [C64; 2]) -> [f64; 3] {
    let ab = v[0].conj() * v[1];
    [2.0 * ab.re, 2.0 * ab.im, v[0].norm_sqr() - v[1].norm_sqr()]
}

/// Bloch vectors of single-qubit states drawn under `mode`.
pub fn bloch_sample<R: Rng + ?Sized>(mode: BlochMode, samples: usize, rng: &mut R) -> Vec<[f64; 3]> {
    let zero = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
    (0..samples)
        .map(|_| {
            let u = match mode {
                BlochMode::UniformAngles => {
                    let t1 = rng.gen_range(0.0..TAU);
                    let t2 = rng.gen_range(0.0..TAU);
                    SingleQubitUnitary::rotation(Axis::Y, t2).mul(&SingleQubitUnitary::rotation(Axis::X, t1))
                }
                BlochMode::HaarLocal => haar_unitary(rng),
            };
            bloch_vector(u.apply_to(zero))
        })
        .collect()
}
