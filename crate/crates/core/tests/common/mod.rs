//! Dense-matrix reference implementation used as an oracle. Everything here
//! is built from explicit 2x2 matrices and Kronecker products, without the
//! crate's kernels.

#![allow(dead_code)]

use clqnn_core::circuit::{Angle, GateOp, ParamCircuit};
use clqnn_core::{Axis, PauliString, PureState, C64};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

pub type M = DMatrix<C64>;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn pauli(idx: u8) -> M {
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    let v = match idx {
        0 => [o, z, z, o],
        1 => [z, o, o, z],
        2 => [z, -i, i, z],
        3 => [o, z, z, -o],
        _ => panic!("bad pauli index"),
    };
    M::from_row_slice(2, 2, &v)
}

pub fn axis_index(a: Axis) -> u8 {
    match a {
        Axis::X => 1,
        Axis::Y => 2,
        Axis::Z => 3,
    }
}

/// `cos θ I - i sin θ P`
pub fn rot(a: Axis, theta: f64) -> M {
    M::identity(2, 2) * c(theta.cos(), 0.0) - pauli(axis_index(a)) * c(0.0, theta.sin())
}

/// `ops[q]` acts on qubit `q`; qubit 0 is the least significant bit, so it
/// is the rightmost Kronecker factor.
pub fn kron_all(ops: &[M]) -> M {
    ops.iter().fold(M::identity(1, 1), |acc, m| m.kronecker(&acc))
}

pub fn on_qubit(n: usize, q: usize, m: &M) -> M {
    let ops: Vec<M> = (0..n).map(|k| if k == q { m.clone() } else { M::identity(2, 2) }).collect();
    kron_all(&ops)
}

pub fn cz(n: usize, a: usize, b: usize) -> M {
    let dim = 1 << n;
    M::from_fn(dim, dim, |r, col| {
        if r != col {
            c(0.0, 0.0)
        } else if (r >> a) & 1 == 1 && (r >> b) & 1 == 1 {
            c(-1.0, 0.0)
        } else {
            c(1.0, 0.0)
        }
    })
}

pub fn cnot(n: usize, control: usize, target: usize) -> M {
    let dim = 1 << n;
    M::from_fn(dim, dim, |r, col| {
        let image = if (col >> control) & 1 == 1 { col ^ (1 << target) } else { col };
        c(if r == image { 1.0 } else { 0.0 }, 0.0)
    })
}

pub fn op_matrix(n: usize, op: &GateOp, theta: &[f64]) -> M {
    match *op {
        GateOp::Rotation { axis, qubit, angle } => {
            let t = match angle {
                Angle::Slot(s) => theta[s],
                Angle::Fixed(a) => a,
            };
            on_qubit(n, qubit, &rot(axis, t))
        }
        GateOp::Cz { a, b } => cz(n, a, b),
        GateOp::Cnot { control, target } => cnot(n, control, target),
    }
}

pub fn circuit_unitary(c_: &ParamCircuit, theta: &[f64]) -> M {
    let n = c_.num_qubits();
    c_.ops().iter().fold(M::identity(1 << n, 1 << n), |acc, op| op_matrix(n, op, theta) * acc)
}

pub fn pauli_string_matrix(p: &PauliString) -> M {
    let ops: Vec<M> = p.indices().iter().map(|&i| pauli(i)).collect();
    kron_all(&ops)
}

pub fn vec_of(s: &PureState) -> DVector<C64> {
    DVector::from_column_slice(s.amplitudes())
}

pub fn expectation(m: &M, v: &DVector<C64>) -> f64 {
    (v.adjoint() * m * v)[(0, 0)].re
}

pub fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn random_state<R: Rng>(n: usize, rng: &mut R) -> PureState {
    let v: Vec<C64> = (0..1 << n).map(|_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
    let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    PureState::from_amplitudes(v.into_iter().map(|x| x / norm).collect()).unwrap()
}

/// Random circuit of `len` ops: rotations on fresh slots, CZ and CNOT on
/// random distinct pairs, one layer mark at the end.
pub fn random_circuit<R: Rng>(n: usize, len: usize, rng: &mut R) -> ParamCircuit {
    let mut ops = Vec::with_capacity(len);
    let mut slot = 0;
    for _ in 0..len {
        let kind = if n < 2 { 0 } else { rng.gen_range(0..4) };
        let pair = |rng: &mut R| {
            let a = rng.gen_range(0..n);
            let mut b = rng.gen_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            (a, b)
        };
        ops.push(match kind {
            0 | 1 => {
                let axis = Axis::ALL[rng.gen_range(0..3)];
                let op = GateOp::Rotation { axis, qubit: rng.gen_range(0..n), angle: Angle::Slot(slot) };
                slot += 1;
                op
            }
            2 => {
                let (a, b) = pair(rng);
                GateOp::Cz { a, b }
            }
            _ => {
                let (control, target) = pair(rng);
                GateOp::Cnot { control, target }
            }
        });
    }
    let marks = if ops.is_empty() { vec![] } else { vec![ops.len()] };
    ParamCircuit::from_parts(n, ops, marks).unwrap()
}

pub fn random_theta<R: Rng>(p: usize, rng: &mut R) -> Vec<f64> {
    (0..p).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect()
}
