//! Parameterized circuits, ansatz builders and parameter initialization.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};
use std::ops::Deref;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::state::{kernel, Axis, PureState, SingleQubitUnitary, C64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Angle {
    Slot(usize),
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateOp {
    Rotation { axis: Axis, qubit: usize, angle: Angle },
    Cz { a: usize, b: usize },
    Cnot { control: usize, target: usize },
}

impl GateOp {
    pub fn qubit_mask(&self) -> usize {
        match *self {
            GateOp::Rotation { qubit, .. } => 1 << qubit,
            GateOp::Cz { a, b } => (1 << a) | (1 << b),
            GateOp::Cnot { control, target } => (1 << control) | (1 << target),
        }
    }

    pub fn slot(&self) -> Option<usize> {
        match *self {
            GateOp::Rotation { angle: Angle::Slot(s), .. } => Some(s),
            _ => None,
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        let check = |q: usize| {
            if q >= n {
                Err(Error::QubitOutOfRange { index: q, num_qubits: n })
            } else {
                Ok(())
            }
        };
        match *self {
            GateOp::Rotation { qubit, angle, .. } => {
                check(qubit)?;
                if let Angle::Fixed(a) = angle {
                    if !a.is_finite() {
                        return Err(Error::InvalidGate(format!("non-finite fixed angle {a}")));
                    }
                }
            }
            GateOp::Cz { a, b } => {
                check(a)?;
                check(b)?;
                if a == b {
                    return Err(Error::InvalidGate(format!("CZ endpoints coincide on qubit {a}")));
                }
            }
            GateOp::Cnot { control, target } => {
                check(control)?;
                check(target)?;
                if control == target {
                    return Err(Error::InvalidGate(format!("CNOT control equals target ({control})")));
                }
            }
        }
        Ok(())
    }

    #[inline]
    pub(crate) fn apply_raw(&self, amps: &mut [C64], theta: &[f64]) {
        match *self {
            GateOp::Rotation { axis, qubit, angle } => {
                let t = match angle {
                    Angle::Slot(s) => theta[s],
                    Angle::Fixed(a) => a,
                };
                let (s, c) = t.sin_cos();
                kernel::rotation(amps, qubit, axis, s, c);
            }
            GateOp::Cz { a, b } => kernel::cz(amps, a, b),
            GateOp::Cnot { control, target } => kernel::cnot(amps, control, target),
        }
    }
}

/// Structure of the parameterized part `W'` of each controlled-layer block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerAnsatz {
    /// `R_X R_Y R_X` on every remaining qubit, no entanglers.
    TensorRotations,
    /// The hardware-efficient ansatz with the given number of layers.
    HardwareEfficient { layers: usize },
}

/// Entangling pattern closing each hardware-efficient layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Entangler {
    /// `(0→1), (1→2), …, (n-1→0)`
    #[default]
    CnotRing,
    /// `(0→1), …, (n-2→n-1)`
    CnotChain,
}

/// Bookkeeping for circuits produced by [`build_cl_qnn`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClLayout {
    pub blocks: usize,
    pub s: usize,
    /// Per block, the `3S` parameter slots of the rotations on qubits `0..S`.
    pub head_slots: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GateBudget {
    pub n_1q: usize,
    pub n_cz: usize,
    pub n_cnot: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamCircuit {
    num_qubits: usize,
    ops: Vec<GateOp>,
    layer_marks: Vec<usize>,
    param_count: usize,
    /// `slot_ops[s]` is the index of the op reading slot `s`.
    slot_ops: Vec<usize>,
    /// `(θ1, θ2, θ3)` slots of each `R_X(θ3) R_Y(θ2) R_X(θ1)` sequence.
    xyx_triples: Vec<[usize; 3]>,
    cl_layout: Option<ClLayout>,
}

impl ParamCircuit {
    pub fn empty(num_qubits: usize) -> Result<Self> {
        Self::from_parts(num_qubits, Vec::new(), Vec::new())
    }

    /// Validates qubit ranges, the slot bijection over `0..P` and the layer
    /// marks (strictly increasing, last one equal to `ops.len()`).
    pub fn from_parts(num_qubits: usize, ops: Vec<GateOp>, layer_marks: Vec<usize>) -> Result<Self> {
        if num_qubits == 0 || num_qubits > crate::state::MAX_QUBITS {
            return Err(invalid(format!("unsupported qubit count {num_qubits}")));
        }
        let mut slots: Vec<(usize, usize)> = Vec::new();
        for (i, op) in ops.iter().enumerate() {
            op.validate(num_qubits)?;
            if let Some(s) = op.slot() {
                slots.push((s, i));
            }
        }
        slots.sort_unstable();
        let param_count = slots.len();
        for (expected, &(s, _)) in slots.iter().enumerate() {
            if s != expected {
                return Err(invalid(format!(
                    "parameter slots must be used exactly once and cover 0..{param_count}; slot {expected} is {}",
                    if s > expected { "missing" } else { "reused" }
                )));
            }
        }
        if layer_marks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("layer marks must be strictly increasing"));
        }
        match layer_marks.last() {
            Some(&last) if last != ops.len() => {
                return Err(invalid(format!("last layer mark {last} != op count {}", ops.len())))
            }
            None if !ops.is_empty() => return Err(invalid("non-empty circuit needs layer marks")),
            _ => {}
        }
        if layer_marks.first() == Some(&0) {
            return Err(invalid("layer marks must be positive"));
        }
        Ok(Self {
            num_qubits,
            ops,
            layer_marks,
            param_count,
            slot_ops: slots.into_iter().map(|(_, i)| i).collect(),
            xyx_triples: Vec::new(),
            cl_layout: None,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn ops(&self) -> &[GateOp] {
        &self.ops
    }

    pub fn layer_marks(&self) -> &[usize] {
        &self.layer_marks
    }

    pub fn param_count(&self) -> usize {
        self.param_count
    }

    pub fn slot_op(&self, slot: usize) -> usize {
        self.slot_ops[slot]
    }

    pub fn xyx_triples(&self) -> &[[usize; 3]] {
        &self.xyx_triples
    }

    pub fn cl_layout(&self) -> Option<&ClLayout> {
        self.cl_layout.as_ref()
    }

    pub fn gate_budget(&self) -> GateBudget {
        let mut b = GateBudget::default();
        for op in &self.ops {
            match op {
                GateOp::Rotation { .. } => b.n_1q += 1,
                GateOp::Cz { .. } => b.n_cz += 1,
                GateOp::Cnot { .. } => b.n_cnot += 1,
            }
        }
        b
    }

    /// Largest number of single-qubit rotations acting on any one qubit.
    pub fn rotation_depth(&self) -> usize {
        let mut per_qubit = vec![0usize; self.num_qubits];
        for op in &self.ops {
            if let GateOp::Rotation { qubit, .. } = op {
                per_qubit[*qubit] += 1;
            }
        }
        per_qubit.into_iter().max().unwrap_or(0)
    }

    /// Ops that can influence an observable supported on `support_mask`.
    /// Everything else commutes past the measurement.
    pub fn backward_lightcone(&self, support_mask: usize) -> Vec<bool> {
        let mut live = support_mask;
        let mut keep = vec![false; self.ops.len()];
        for (i, op) in self.ops.iter().enumerate().rev() {
            let m = op.qubit_mask();
            if m & live != 0 {
                keep[i] = true;
                live |= m;
            }
        }
        keep
    }

    pub fn run(&self, theta: &[f64], input: &PureState) -> Result<PureState> {
        let mut out = input.clone();
        self.run_in_place(theta, &mut out)?;
        Ok(out)
    }

    pub fn run_in_place(&self, theta: &[f64], state: &mut PureState) -> Result<()> {
        self.check_inputs(theta, state.num_qubits())?;
        let amps = state.amplitudes_mut();
        for op in &self.ops {
            op.apply_raw(amps, theta);
        }
        Ok(())
    }

    pub(crate) fn check_inputs(&self, theta: &[f64], n: usize) -> Result<()> {
        if theta.len() != self.param_count {
            return Err(Error::DimensionMismatch { expected: self.param_count, got: theta.len() });
        }
        if n != self.num_qubits {
            return Err(Error::DimensionMismatch { expected: self.num_qubits, got: n });
        }
        if let Some(bad) = theta.iter().find(|t| !t.is_finite()) {
            return Err(invalid(format!("non-finite parameter {bad}")));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&CircuitJson::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: CircuitJson = serde_json::from_str(text)?;
        raw.into_circuit()
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CircuitJson {
    n: usize,
    ops: Vec<OpJson>,
    layer_marks: Vec<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OpJson {
    kind: String,
    qubits: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    axis: Option<Axis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    slot: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    angle: Option<f64>,
}

impl From<&ParamCircuit> for CircuitJson {
    fn from(c: &ParamCircuit) -> Self {
        let ops = c
            .ops
            .iter()
            .map(|op| match *op {
                GateOp::Rotation { axis, qubit, angle } => OpJson {
                    kind: "rotation".into(),
                    qubits: vec![qubit],
                    axis: Some(axis),
                    slot: match angle {
                        Angle::Slot(s) => Some(s),
                        Angle::Fixed(_) => None,
                    },
                    angle: match angle {
                        Angle::Fixed(a) => Some(a),
                        Angle::Slot(_) => None,
                    },
                },
                GateOp::Cz { a, b } => {
                    OpJson { kind: "cz".into(), qubits: vec![a, b], axis: None, slot: None, angle: None }
                }
                GateOp::Cnot { control, target } => OpJson {
                    kind: "cnot".into(),
                    qubits: vec![control, target],
                    axis: None,
                    slot: None,
                    angle: None,
                },
            })
            .collect();
        CircuitJson { n: c.num_qubits, ops, layer_marks: c.layer_marks.clone() }
    }
}

impl CircuitJson {
    fn into_circuit(self) -> Result<ParamCircuit> {
        let ops = self
            .ops
            .into_iter()
            .enumerate()
            .map(|(i, o)| {
                let bad = |msg: &str| invalid(format!("op {i}: {msg}"));
                match (o.kind.as_str(), o.qubits.as_slice()) {
                    ("rotation", &[qubit]) => {
                        let axis = o.axis.ok_or_else(|| bad("rotation needs an axis"))?;
                        let angle = match (o.slot, o.angle) {
                            (Some(s), None) => Angle::Slot(s),
                            (None, Some(a)) => Angle::Fixed(a),
                            _ => return Err(bad("rotation needs exactly one of slot/angle")),
                        };
                        Ok(GateOp::Rotation { axis, qubit, angle })
                    }
                    ("cz", &[a, b]) => Ok(GateOp::Cz { a, b }),
                    ("cnot", &[control, target]) => Ok(GateOp::Cnot { control, target }),
                    (kind, q) => Err(bad(&format!("unsupported kind {kind:?} on {} qubits", q.len()))),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        ParamCircuit::from_parts(self.n, ops, self.layer_marks)
    }
}

struct Builder {
    n: usize,
    ops: Vec<GateOp>,
    marks: Vec<usize>,
    next_slot: usize,
    triples: Vec<[usize; 3]>,
}

impl Builder {
    fn new(n: usize) -> Self {
        Self { n, ops: Vec::new(), marks: Vec::new(), next_slot: 0, triples: Vec::new() }
    }

    fn mark(&mut self) {
        if self.marks.last() != Some(&self.ops.len()) && !self.ops.is_empty() {
            self.marks.push(self.ops.len());
        }
    }

    fn rotation_layer(&mut self, axis: Axis, qubits: &[usize]) -> Vec<usize> {
        let slots: Vec<usize> = qubits
            .iter()
            .map(|&qubit| {
                let slot = self.next_slot;
                self.next_slot += 1;
                self.ops.push(GateOp::Rotation { axis, qubit, angle: Angle::Slot(slot) });
                slot
            })
            .collect();
        self.mark();
        slots
    }

    /// `R_X R_Y R_X` on each qubit as three marked sub-layers; returns all
    /// slots in creation order.
    fn xyx_layer(&mut self, qubits: &[usize]) -> Vec<usize> {
        let first = self.rotation_layer(Axis::X, qubits);
        let second = self.rotation_layer(Axis::Y, qubits);
        let third = self.rotation_layer(Axis::X, qubits);
        for i in 0..qubits.len() {
            self.triples.push([first[i], second[i], third[i]]);
        }
        first.into_iter().chain(second).chain(third).collect()
    }

    fn cz_layer(&mut self, pairs: &[(usize, usize)]) {
        self.ops.extend(pairs.iter().map(|&(a, b)| GateOp::Cz { a, b }));
        self.mark();
    }

    fn cnot_layer(&mut self, pairs: &[(usize, usize)]) {
        self.ops.extend(pairs.iter().map(|&(control, target)| GateOp::Cnot { control, target }));
        self.mark();
    }

    fn hardware_efficient(&mut self, qubits: &[usize], layers: usize, entangler: Entangler) {
        let pairs = cnot_pairs(qubits, entangler);
        for _ in 0..layers {
            self.xyx_layer(qubits);
            self.cnot_layer(&pairs);
        }
    }

    fn finish(self) -> Result<ParamCircuit> {
        let mut c = ParamCircuit::from_parts(self.n, self.ops, self.marks)?;
        c.xyx_triples = self.triples;
        Ok(c)
    }
}

/// Nearest-neighbour CZ ring over `qubits`. Two qubits give a single CZ,
/// since `CZ(a,b)` and `CZ(b,a)` are the same gate and would cancel.
pub fn cz_ring(qubits: &[usize]) -> Vec<(usize, usize)> {
    match qubits.len() {
        0 | 1 => Vec::new(),
        2 => vec![(qubits[0], qubits[1])],
        n => (0..n).map(|i| (qubits[i], qubits[(i + 1) % n])).collect(),
    }
}

fn cnot_pairs(qubits: &[usize], entangler: Entangler) -> Vec<(usize, usize)> {
    let n = qubits.len();
    if n < 2 {
        return Vec::new();
    }
    match entangler {
        Entangler::CnotRing => (0..n).map(|i| (qubits[i], qubits[(i + 1) % n])).collect(),
        Entangler::CnotChain => (0..n - 1).map(|i| (qubits[i], qubits[i + 1])).collect(),
    }
}

/// Controlled-layer QNN with `l` blocks. Each block is a CZ ring over all
/// qubits, `R_X R_Y R_X` on qubits `0..s`, then `W'` on qubits `s..n`.
pub fn build_cl_qnn(n: usize, s: usize, l: usize, inner: InnerAnsatz) -> Result<ParamCircuit> {
    build_cl_qnn_with(n, s, l, inner, Entangler::default())
}

pub fn build_cl_qnn_with(
    n: usize,
    s: usize,
    l: usize,
    inner: InnerAnsatz,
    entangler: Entangler,
) -> Result<ParamCircuit> {
    if s < 1 || s >= n {
        return Err(invalid(format!("CL-QNN needs 1 <= S < N, got S={s}, N={n}")));
    }
    if l < 1 {
        return Err(invalid("CL-QNN needs at least one block"));
    }
    if let InnerAnsatz::HardwareEfficient { layers: 0 } = inner {
        return Err(invalid("inner hardware-efficient ansatz needs at least one layer"));
    }
    let all: Vec<usize> = (0..n).collect();
    let (head, rest) = all.split_at(s);
    let ring = cz_ring(&all);
    let mut b = Builder::new(n);
    let mut head_slots = Vec::with_capacity(l);
    for _ in 0..l {
        b.cz_layer(&ring);
        head_slots.push(b.xyx_layer(head));
        match inner {
            InnerAnsatz::TensorRotations => {
                b.xyx_layer(rest);
            }
            InnerAnsatz::HardwareEfficient { layers } => b.hardware_efficient(rest, layers, entangler),
        }
    }
    let mut c = b.finish()?;
    c.cl_layout = Some(ClLayout { blocks: l, s, head_slots });
    Ok(c)
}

/// Hardware-efficient ansatz: `layers` repetitions of `R_X R_Y R_X` on every
/// qubit followed by a CNOT ring.
pub fn build_he_ansatz(n: usize, layers: usize) -> Result<ParamCircuit> {
    build_he_ansatz_with(n, layers, Entangler::default())
}

pub fn build_he_ansatz_with(n: usize, layers: usize, entangler: Entangler) -> Result<ParamCircuit> {
    if n < 2 || layers < 1 {
        return Err(invalid(format!("HE ansatz needs N >= 2 and L_HE >= 1, got N={n}, L_HE={layers}")));
    }
    let all: Vec<usize> = (0..n).collect();
    let mut b = Builder::new(n);
    b.hardware_efficient(&all, layers, entangler);
    b.finish()
}

#[derive(Clone, Copy)]
enum GateKind {
    OneQubit,
    Cz,
    Cnot,
}

/// Random circuit with exactly the budgeted gate counts. Rotations draw a
/// uniform axis and qubit, two-qubit gates a uniform ordered pair of distinct
/// qubits, and the gate order is a uniform shuffle. Every rotation gets its
/// own parameter slot.
pub fn build_random_qnn<R: Rng + ?Sized>(n: usize, budget: GateBudget, rng: &mut R) -> Result<ParamCircuit> {
    if n < 2 && budget.n_cz + budget.n_cnot > 0 {
        return Err(invalid("two-qubit gates need at least two qubits"));
    }
    let mut kinds: Vec<GateKind> = std::iter::repeat(GateKind::OneQubit)
        .take(budget.n_1q)
        .chain(std::iter::repeat(GateKind::Cz).take(budget.n_cz))
        .chain(std::iter::repeat(GateKind::Cnot).take(budget.n_cnot))
        .collect();
    kinds.shuffle(rng);
    let mut ops = Vec::with_capacity(kinds.len());
    let mut next_slot = 0;
    for kind in kinds {
        match kind {
            GateKind::OneQubit => {
                let axis = Axis::ALL[rng.gen_range(0..3)];
                let qubit = rng.gen_range(0..n);
                ops.push(GateOp::Rotation { axis, qubit, angle: Angle::Slot(next_slot) });
                next_slot += 1;
            }
            GateKind::Cz | GateKind::Cnot => {
                let a = rng.gen_range(0..n);
                let mut b = rng.gen_range(0..n - 1);
                if b >= a {
                    b += 1;
                }
                ops.push(match kind {
                    GateKind::Cz => GateOp::Cz { a, b },
                    _ => GateOp::Cnot { control: a, target: b },
                });
            }
        }
    }
    let marks = greedy_layers(&ops);
    ParamCircuit::from_parts(n, ops, marks)
}

/// Packs ops in order into layers; a layer closes when the next op touches a
/// qubit already used in it.
fn greedy_layers(ops: &[GateOp]) -> Vec<usize> {
    let mut marks = Vec::new();
    let mut used = 0usize;
    for (i, op) in ops.iter().enumerate() {
        let m = op.qubit_mask();
        if used & m != 0 {
            marks.push(i);
            used = 0;
        }
        used |= m;
    }
    if !ops.is_empty() {
        marks.push(ops.len());
    }
    marks
}

/// Circuit parameters in radians.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterVector(Vec<f64>);

impl ParameterVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(invalid(format!("non-finite parameter {bad}")));
        }
        Ok(Self(values))
    }

    pub fn zeros(p: usize) -> Self {
        Self(vec![0.0; p])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl Deref for ParameterVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// I.i.d. uniform angles in `[0, 2π)`.
pub fn init_uniform<R: Rng + ?Sized>(p: usize, rng: &mut R) -> ParameterVector {
    ParameterVector((0..p).map(|_| rng.gen_range(0.0..TAU)).collect())
}

/// Haar-random 2x2 unitary: complex Ginibre matrix orthonormalized by
/// Gram-Schmidt, which leaves a positive real `R` diagonal.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R) -> SingleQubitUnitary {
    let mut g = || C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
    let c0 = [g(), g()];
    let c1 = [g(), g()];
    let n0 = (c0[0].norm_sqr() + c0[1].norm_sqr()).sqrt();
    let q0 = [c0[0] / n0, c0[1] / n0];
    let proj = q0[0].conj() * c1[0] + q0[1].conj() * c1[1];
    let r1 = [c1[0] - proj * q0[0], c1[1] - proj * q0[1]];
    let n1 = (r1[0].norm_sqr() + r1[1].norm_sqr()).sqrt();
    let q1 = [r1[0] / n1, r1[1] / n1];
    SingleQubitUnitary::new_unchecked([[q0[0], q1[0]], [q0[1], q1[1]]])
}

const POLE_TOL: f64 = 1e-12;

/// Angles `(θ1, θ2, θ3)` with `R_X(θ3) R_Y(θ2) R_X(θ1) = U` up to a global
/// phase, `θ2 ∈ [0, π/2]`. At the poles `θ2 ∈ {0, π/2}` only one
/// combination of `θ1`, `θ3` is determined and `θ1 = 0` is chosen.
pub fn xyx_angles(u: &SingleQubitUnitary) -> (f64, f64, f64) {
    // Q = R_Y(π/4) maps X → -Z and fixes Y, turning XYX into ZYZ.
    let h = FRAC_1_SQRT_2;
    let q = SingleQubitUnitary::new_unchecked([[C64::new(h, 0.0), C64::new(-h, 0.0)], [C64::new(h, 0.0), C64::new(h, 0.0)]]);
    let v = q.mul(u).mul(&q.adjoint());
    let m = v.matrix();
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let scale = det.sqrt();
    // V/√det = R_Z(α) R_Y(β) R_Z(γ) = [[e^{-i(α+γ)}cosβ, ·], [e^{i(α-γ)}sinβ, ·]]
    let a = m[0][0] / scale;
    let b = m[1][0] / scale;
    let beta = b.norm().atan2(a.norm());
    let (alpha, gamma) = if b.norm() < POLE_TOL {
        (-a.arg(), 0.0)
    } else if a.norm() < POLE_TOL {
        (b.arg(), 0.0)
    } else {
        ((b.arg() - a.arg()) / 2.0, -(a.arg() + b.arg()) / 2.0)
    };
    // R_X(t) = Q† R_Z(-t) Q, so θ1 = -γ, θ3 = -α; `+ 0.0` clears negative zero
    (-gamma + 0.0, beta, -alpha + 0.0)
}

/// Angles of a Haar-random local unitary in `R_X R_Y R_X` form.
pub fn haar_local_angles<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64, f64) {
    xyx_angles(&haar_unitary(rng))
}

/// Parameters where every `R_X R_Y R_X` triple of the circuit implements an
/// independent Haar-random single-qubit unitary.
pub fn init_haar_local<R: Rng + ?Sized>(circuit: &ParamCircuit, rng: &mut R) -> Result<ParameterVector> {
    let triples = circuit.xyx_triples();
    if triples.len() * 3 != circuit.param_count() {
        return Err(invalid("Haar-local initialization needs a circuit made of R_X R_Y R_X triples"));
    }
    let mut theta = vec![0.0; circuit.param_count()];
    for t in triples {
        let (a1, a2, a3) = haar_local_angles(rng);
        theta[t[0]] = a1;
        theta[t[1]] = a2;
        theta[t[2]] = a3;
    }
    Ok(ParameterVector(theta))
}
