//! Dense statevector simulation.
//!
//! Amplitudes are stored little-endian: qubit `q` corresponds to bit `q` of
//! the basis-state index. Rotations follow the `R_G(θ) = exp(-iθG)`
//! convention, so `R_G(θ) = cos θ · I - i sin θ · G` for any Pauli `G`.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Largest register the dense backend accepts.
pub const MAX_QUBITS: usize = 22;

const UNITARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn as_char(self) -> char {
        match self {
            Axis::X => 'X',
            Axis::Y => 'Y',
            Axis::Z => 'Z',
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// A validated 2x2 unitary, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleQubitUnitary([[C64; 2]; 2]);

impl SingleQubitUnitary {
    pub fn new(m: [[C64; 2]; 2]) -> Result<Self> {
        let dev = unitarity_deviation(&m);
        if !(dev <= UNITARY_TOL) {
            return Err(Error::NotUnitary(dev));
        }
        Ok(Self(m))
    }

    /// Skips validation. Callers guarantee unitarity by construction.
    pub(crate) fn new_unchecked(m: [[C64; 2]; 2]) -> Self {
        Self(m)
    }

    pub fn identity() -> Self {
        let (o, z) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
        Self([[o, z], [z, o]])
    }

    pub fn pauli(axis: Axis) -> Self {
        let (o, z, i) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 1.0));
        match axis {
            Axis::X => Self([[z, o], [o, z]]),
            Axis::Y => Self([[z, -i], [i, z]]),
            Axis::Z => Self([[o, z], [z, -o]]),
        }
    }

    pub fn hadamard() -> Self {
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self([[h, h], [h, -h]])
    }

    /// `exp(-iθG)` for the Pauli `G` selected by `axis`.
    pub fn rotation(axis: Axis, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        let z = C64::new(0.0, 0.0);
        match axis {
            Axis::X => Self([[C64::new(c, 0.0), C64::new(0.0, -s)], [C64::new(0.0, -s), C64::new(c, 0.0)]]),
            Axis::Y => Self([[C64::new(c, 0.0), C64::new(-s, 0.0)], [C64::new(s, 0.0), C64::new(c, 0.0)]]),
            Axis::Z => Self([[C64::new(c, -s), z], [z, C64::new(c, s)]]),
        }
    }

    pub fn matrix(&self) -> &[[C64; 2]; 2] {
        &self.0
    }

    /// `self · rhs`
    pub fn mul(&self, rhs: &Self) -> Self {
        Self(matmul2(&self.0, &rhs.0))
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Self([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn apply_to(&self, v: [C64; 2]) -> [C64; 2] {
        let m = &self.0;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }
}

pub(crate) fn matmul2(a: &[[C64; 2]; 2], b: &[[C64; 2]; 2]) -> [[C64; 2]; 2] {
    let mut out = [[C64::new(0.0, 0.0); 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn unitarity_deviation(m: &[[C64; 2]; 2]) -> f64 {
    let mut dev: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let dot = m[i][0] * m[j][0].conj() + m[i][1] * m[j][1].conj();
            let target = if i == j { 1.0 } else { 0.0 };
            let d = (dot - C64::new(target, 0.0)).norm();
            // NaN propagates so non-finite input is rejected
            dev = if d.is_nan() { f64::NAN } else { dev.max(d) };
            if dev.is_nan() {
                return dev;
            }
        }
    }
    dev
}

/// Gate kernels over a flat amplitude buffer, addressed by bit position.
/// Shared by the pure and density-matrix backends.
pub(crate) mod kernel {
    use super::{Axis, C64};

    #[inline]
    fn for_each_pair(amps: &mut [C64], bit: usize, mut f: impl FnMut(&mut C64, &mut C64)) {
        let stride = 1usize << bit;
        for chunk in amps.chunks_exact_mut(stride << 1) {
            let (lo, hi) = chunk.split_at_mut(stride);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                f(a, b);
            }
        }
    }

    /// `exp(-iθG)` on `bit`, given `(sin θ, cos θ)`.
    pub fn rotation(amps: &mut [C64], bit: usize, axis: Axis, s: f64, c: f64) {
        match axis {
            Axis::X => for_each_pair(amps, bit, |a, b| {
                let (x, y) = (*a, *b);
                // c·x - i s·y, -i s·x + c·y
                *a = C64::new(c * x.re + s * y.im, c * x.im - s * y.re);
                *b = C64::new(c * y.re + s * x.im, c * y.im - s * x.re);
            }),
            Axis::Y => for_each_pair(amps, bit, |a, b| {
                let (x, y) = (*a, *b);
                *a = x * c - y * s;
                *b = x * s + y * c;
            }),
            Axis::Z => {
                let lo = C64::new(c, -s);
                let hi = C64::new(c, s);
                for_each_pair(amps, bit, |a, b| {
                    *a *= lo;
                    *b *= hi;
                })
            }
        }
    }

    pub fn unitary(amps: &mut [C64], bit: usize, m: &[[C64; 2]; 2]) {
        for_each_pair(amps, bit, |a, b| {
            let (x, y) = (*a, *b);
            *a = m[0][0] * x + m[0][1] * y;
            *b = m[1][0] * x + m[1][1] * y;
        });
    }

    pub fn cz(amps: &mut [C64], bit_a: usize, bit_b: usize) {
        let mask = (1usize << bit_a) | (1usize << bit_b);
        for (k, a) in amps.iter_mut().enumerate() {
            if k & mask == mask {
                *a = -*a;
            }
        }
    }

    pub fn cnot(amps: &mut [C64], control: usize, target: usize) {
        let cmask = 1usize << control;
        let tmask = 1usize << target;
        for k in 0..amps.len() {
            if k & cmask != 0 && k & tmask == 0 {
                amps.swap(k, k | tmask);
            }
        }
    }
}

/// Normalized pure state on `num_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    num_qubits: usize,
    amps: Vec<C64>,
}

impl PureState {
    /// `|0…0⟩`
    pub fn zero(num_qubits: usize) -> Result<Self> {
        Self::basis(num_qubits, 0)
    }

    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        check_width(num_qubits)?;
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for {num_qubits} qubits"
            )));
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self { num_qubits, amps })
    }

    /// Wraps an amplitude vector. The length must be a power of two and the
    /// norm must be 1 within 1e-8.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let dim = amps.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "amplitude vector length {dim} is not a power of two >= 2"
            )));
        }
        let num_qubits = dim.trailing_zeros() as usize;
        check_width(num_qubits)?;
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if !((norm - 1.0).abs() < 1e-8) {
            return Err(Error::InvalidArgument(format!("state norm^2 is {norm}, expected 1")));
        }
        Ok(Self { num_qubits, amps })
    }

    /// Tensor product of single-qubit states; `factors[q]` is qubit `q`.
    pub fn product(factors: &[[C64; 2]]) -> Result<Self> {
        check_width(factors.len())?;
        let mut amps = vec![C64::new(1.0, 0.0)];
        for f in factors {
            let norm = f[0].norm_sqr() + f[1].norm_sqr();
            if !((norm - 1.0).abs() < 1e-10) {
                return Err(Error::InvalidArgument(format!("qubit factor norm^2 is {norm}")));
            }
            // new qubit is the next most significant bit
            let mut next = Vec::with_capacity(amps.len() * 2);
            next.extend(amps.iter().map(|a| a * f[0]));
            next.extend(amps.iter().map(|a| a * f[1]));
            amps = next;
        }
        Ok(Self { num_qubits: factors.len(), amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &PureState) -> Result<C64> {
        self.check_same_width(other.num_qubits)?;
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn apply_rotation(&mut self, axis: Axis, theta: f64, target: usize) -> Result<()> {
        self.check_qubit(target)?;
        if !theta.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite rotation angle {theta}")));
        }
        let (s, c) = theta.sin_cos();
        kernel::rotation(&mut self.amps, target, axis, s, c);
        Ok(())
    }

    pub fn apply_cz(&mut self, a: usize, b: usize) -> Result<()> {
        self.check_qubit(a)?;
        self.check_qubit(b)?;
        if a == b {
            return Err(Error::InvalidGate(format!("CZ endpoints coincide on qubit {a}")));
        }
        kernel::cz(&mut self.amps, a, b);
        Ok(())
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(Error::InvalidGate(format!("CNOT control equals target ({control})")));
        }
        kernel::cnot(&mut self.amps, control, target);
        Ok(())
    }

    pub fn apply_unitary_1q(&mut self, u: &SingleQubitUnitary, target: usize) -> Result<()> {
        self.check_qubit(target)?;
        kernel::unitary(&mut self.amps, target, u.matrix());
        Ok(())
    }

    pub(crate) fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.num_qubits {
            return Err(Error::QubitOutOfRange { index: q, num_qubits: self.num_qubits });
        }
        Ok(())
    }

    pub(crate) fn check_same_width(&self, n: usize) -> Result<()> {
        if n != self.num_qubits {
            return Err(Error::DimensionMismatch { expected: self.num_qubits, got: n });
        }
        Ok(())
    }
}

fn check_width(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::InvalidArgument(format!(
            "qubit count {n} outside supported range 1..={MAX_QUBITS}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn zero_angle_rotation_is_identity() {
        let mut psi = PureState::zero(2).unwrap();
        psi.apply_rotation(Axis::Y, 0.3, 1).unwrap();
        let before = psi.clone();
        psi.apply_rotation(Axis::X, 0.0, 0).unwrap();
        assert_eq!(psi, before);
    }

    #[test]
    fn ry_quarter_pi_makes_plus_state() {
        let mut psi = PureState::zero(1).unwrap();
        psi.apply_rotation(Axis::Y, FRAC_PI_4, 0).unwrap();
        let a = psi.amplitudes();
        assert!(close(a[0], C64::new(FRAC_1_SQRT_2, 0.0), 1e-15));
        assert!(close(a[1], C64::new(FRAC_1_SQRT_2, 0.0), 1e-15));
    }

    #[test]
    fn cz_signs() {
        let mut psi = PureState::basis(2, 0b11).unwrap();
        psi.apply_cz(0, 1).unwrap();
        assert_eq!(psi.amplitudes()[3], C64::new(-1.0, 0.0));
        let mut zero = PureState::zero(2).unwrap();
        zero.apply_cz(1, 0).unwrap();
        assert_eq!(zero, PureState::zero(2).unwrap());
    }

    #[test]
    fn cnot_flips_target_when_control_set() {
        // |10⟩ in ket order q1 q0: qubit 1 set
        let mut psi = PureState::basis(2, 0b10).unwrap();
        psi.apply_cnot(1, 0).unwrap();
        assert_eq!(psi, PureState::basis(2, 0b11).unwrap());
        let mut zero = PureState::zero(2).unwrap();
        zero.apply_cnot(1, 0).unwrap();
        assert_eq!(zero, PureState::zero(2).unwrap());
    }

    #[test]
    fn two_qubit_gate_errors() {
        let mut psi = PureState::zero(3).unwrap();
        assert!(matches!(psi.apply_cz(1, 1), Err(Error::InvalidGate(_))));
        assert!(matches!(psi.apply_cnot(2, 2), Err(Error::InvalidGate(_))));
        assert!(matches!(psi.apply_cz(0, 3), Err(Error::QubitOutOfRange { .. })));
        assert!(matches!(
            psi.apply_rotation(Axis::X, 1.0, 3),
            Err(Error::QubitOutOfRange { index: 3, num_qubits: 3 })
        ));
    }

    #[test]
    fn unitary_validation() {
        let bad = [[C64::new(1.0, 0.0), C64::new(1.0, 0.0)], [C64::new(0.0, 0.0), C64::new(1.0, 0.0)]];
        assert!(matches!(SingleQubitUnitary::new(bad), Err(Error::NotUnitary(_))));
        let nan = [[C64::new(f64::NAN, 0.0), C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), C64::new(1.0, 0.0)]];
        assert!(SingleQubitUnitary::new(nan).is_err());
        assert!(SingleQubitUnitary::new(*SingleQubitUnitary::hadamard().matrix()).is_ok());
    }

    #[test]
    fn unitary_1q_examples() {
        let mut psi = PureState::zero(1).unwrap();
        psi.apply_unitary_1q(&SingleQubitUnitary::identity(), 0).unwrap();
        assert_eq!(psi, PureState::zero(1).unwrap());
        psi.apply_unitary_1q(&SingleQubitUnitary::pauli(Axis::X), 0).unwrap();
        assert_eq!(psi, PureState::basis(1, 1).unwrap());
    }

    #[test]
    fn product_state_ordering() {
        let zero = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        let one = [C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
        let psi = PureState::product(&[one, zero, zero]).unwrap();
        assert_eq!(psi, PureState::basis(3, 0b001).unwrap());
    }

    #[test]
    fn width_limits() {
        assert!(PureState::zero(0).is_err());
        assert!(PureState::zero(MAX_QUBITS + 1).is_err());
        assert!(PureState::from_amplitudes(vec![C64::new(1.0, 0.0); 3]).is_err());
    }
}
