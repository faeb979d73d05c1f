//! Density-matrix backend with single-qubit depolarizing noise.
//!
//! `ρ` is stored row-major as a flat vector, so entry `(r, c)` sits at index
//! `r·2^N + c`: column bits occupy positions `0..N` and row bits `N..2N`.
//! A gate `U` on qubit `q` acts as `U` on bit `q + N` and `conj(U)` on bit `q`.

use nalgebra::DMatrix;

use crate::circuit::{Angle, GateOp, ParamCircuit};
use crate::error::{Error, Result};
use crate::pauli::PauliString;
use crate::state::{kernel, PureState, C64};

/// Largest register the density-matrix backend accepts.
pub const MAX_NOISY_QUBITS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct MixedState {
    num_qubits: usize,
    rho: Vec<C64>,
}

impl MixedState {
    pub fn from_pure(psi: &PureState) -> Result<Self> {
        let n = psi.num_qubits();
        check_width(n)?;
        let a = psi.amplitudes();
        let mut rho = Vec::with_capacity(a.len() * a.len());
        for r in a {
            rho.extend(a.iter().map(|c| r * c.conj()));
        }
        Ok(Self { num_qubits: n, rho })
    }

    pub fn zero(num_qubits: usize) -> Result<Self> {
        Self::from_pure(&PureState::zero(num_qubits)?)
    }

    pub fn maximally_mixed(num_qubits: usize) -> Result<Self> {
        check_width(num_qubits)?;
        let dim = 1usize << num_qubits;
        let mut rho = vec![C64::new(0.0, 0.0); dim * dim];
        for k in 0..dim {
            rho[k * dim + k] = C64::new(1.0 / dim as f64, 0.0);
        }
        Ok(Self { num_qubits, rho })
    }

    /// From a dense matrix; must be Hermitian with unit trace within 1e-10.
    pub fn from_matrix(m: &DMatrix<C64>) -> Result<Self> {
        let dim = m.nrows();
        if dim != m.ncols() || dim < 2 || !dim.is_power_of_two() {
            return Err(Error::InvalidArgument(format!("density matrix shape {}x{} invalid", m.nrows(), m.ncols())));
        }
        let n = dim.trailing_zeros() as usize;
        check_width(n)?;
        let mut rho = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                rho.push(m[(r, c)]);
            }
        }
        let s = Self { num_qubits: n, rho };
        let herm = s.hermiticity_deviation();
        if herm > 1e-10 {
            return Err(Error::NotHermitian(herm));
        }
        if (s.trace() - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!("density matrix trace {} != 1", s.trace())));
        }
        Ok(s)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.num_qubits
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.rho[row * self.dim() + col]
    }

    pub fn to_matrix(&self) -> DMatrix<C64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |r, c| self.rho[r * d + c])
    }

    pub fn trace(&self) -> f64 {
        let d = self.dim();
        (0..d).map(|k| self.rho[k * d + k].re).sum()
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        let d = self.dim();
        let mut dev: f64 = 0.0;
        for r in 0..d {
            for c in r..d {
                dev = dev.max((self.rho[r * d + c] - self.rho[c * d + r].conj()).norm());
            }
        }
        dev
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.num_qubits {
            return Err(Error::QubitOutOfRange { index: q, num_qubits: self.num_qubits });
        }
        Ok(())
    }

    /// `ρ → UρU†` for one circuit op.
    pub(crate) fn apply_op(&mut self, op: &GateOp, theta: &[f64]) {
        let n = self.num_qubits;
        let rho = &mut self.rho;
        match *op {
            GateOp::Rotation { axis, qubit, angle } => {
                let t = match angle {
                    Angle::Slot(s) => theta[s],
                    Angle::Fixed(a) => a,
                };
                let (s, c) = t.sin_cos();
                kernel::rotation(rho, qubit + n, axis, s, c);
                // conj(exp(-iθG)) is exp(+iθG) for G = X, Z and unchanged for Y
                let s_conj = if axis == crate::state::Axis::Y { s } else { -s };
                kernel::rotation(rho, qubit, axis, s_conj, c);
            }
            GateOp::Cz { a, b } => {
                kernel::cz(rho, a + n, b + n);
                kernel::cz(rho, a, b);
            }
            GateOp::Cnot { control, target } => {
                kernel::cnot(rho, control + n, target + n);
                kernel::cnot(rho, control, target);
            }
        }
    }

    /// Single-qubit depolarizing channel `qρ + (1-q)/2 · I ⊗ Tr_target ρ`,
    /// equivalently `((1+3q)/4)ρ + ((1-q)/4)(XρX + YρY + ZρZ)` on `target`.
    pub fn depolarize_qubit(&mut self, q: f64, target: usize) -> Result<()> {
        check_noise(q)?;
        self.check_qubit(target)?;
        self.depolarize_unchecked(q, target);
        Ok(())
    }

    fn depolarize_unchecked(&mut self, q: f64, target: usize) {
        let col = 1usize << target;
        let row = 1usize << (target + self.num_qubits);
        let keep = (1.0 + q) / 2.0;
        let swap = (1.0 - q) / 2.0;
        for idx in 0..self.rho.len() {
            if idx & (row | col) != 0 {
                continue;
            }
            let (i00, i01, i10, i11) = (idx, idx | col, idx | row, idx | row | col);
            let (a, d) = (self.rho[i00], self.rho[i11]);
            self.rho[i00] = a * keep + d * swap;
            self.rho[i11] = a * swap + d * keep;
            self.rho[i01] *= q;
            self.rho[i10] *= q;
        }
    }

    pub fn depolarize_all(&mut self, q: f64) -> Result<()> {
        check_noise(q)?;
        for t in 0..self.num_qubits {
            self.depolarize_unchecked(q, t);
        }
        Ok(())
    }
}

fn check_width(n: usize) -> Result<()> {
    if n == 0 || n > MAX_NOISY_QUBITS {
        return Err(Error::InvalidArgument(format!(
            "density-matrix backend supports 1..={MAX_NOISY_QUBITS} qubits, got {n}"
        )));
    }
    Ok(())
}

fn check_noise(q: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidArgument(format!("noise parameter q={q} outside [0, 1]")));
    }
    Ok(())
}

/// `Tr[σ_p ρ]`
pub fn expectation_mixed(rho: &MixedState, p: &PauliString) -> Result<f64> {
    if p.num_qubits() != rho.num_qubits {
        return Err(Error::DimensionMismatch { expected: rho.num_qubits, got: p.num_qubits() });
    }
    let m = p.masks();
    let d = rho.dim();
    Ok((0..d).map(|k| (m.phase(k) * rho.rho[k * d + (k ^ m.x)]).re).sum())
}

/// Runs the circuit on `input`, applying the depolarizing channel with
/// parameter `q` to every qubit at each layer mark.
pub fn run_noisy(circuit: &ParamCircuit, theta: &[f64], q: f64, input: &MixedState) -> Result<MixedState> {
    check_noise(q)?;
    circuit.check_inputs(theta, input.num_qubits)?;
    let mut rho = input.clone();
    let mut marks = circuit.layer_marks().iter().peekable();
    for (i, op) in circuit.ops().iter().enumerate() {
        rho.apply_op(op, theta);
        if marks.peek() == Some(&&(i + 1)) {
            marks.next();
            if q < 1.0 {
                for t in 0..rho.num_qubits {
                    rho.depolarize_unchecked(q, t);
                }
            }
        }
    }
    Ok(rho)
}
