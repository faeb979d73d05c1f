//! Pauli-string observables, Hamiltonians and their expectation values.
//!
//! Text form: one character per qubit from `{I, X, Y, Z}`, leftmost character
//! is qubit 0. `"ZIX"` is `Z` on qubit 0 and `X` on qubit 2.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::state::{kernel, PureState, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Pauli {
    I = 0,
    X = 1,
    Y = 2,
    Z = 3,
}

impl Pauli {
    pub fn from_index(i: u8) -> Result<Self> {
        match i {
            0 => Ok(Pauli::I),
            1 => Ok(Pauli::X),
            2 => Ok(Pauli::Y),
            3 => Ok(Pauli::Z),
            _ => Err(Error::InvalidArgument(format!("Pauli index {i} not in 0..=3"))),
        }
    }

    pub fn index(self) -> u8 {
        self as u8
    }

    fn as_char(self) -> char {
        ['I', 'X', 'Y', 'Z'][self as usize]
    }
}

/// Y-to-Z basis change applied before computational-basis sampling:
/// `(1/√2)·[[1, -i], [1, i]]`, i.e. `S†` followed by `H`. It satisfies
/// `U·Y·U† = Z`.
pub const Y_BASIS_CHANGE: [[C64; 2]; 2] = {
    const H: f64 = std::f64::consts::FRAC_1_SQRT_2;
    [[C64::new(H, 0.0), C64::new(0.0, -H)], [C64::new(H, 0.0), C64::new(0.0, H)]]
};

/// X-to-Z basis change (Hadamard).
pub const X_BASIS_CHANGE: [[C64; 2]; 2] = {
    const H: f64 = std::f64::consts::FRAC_1_SQRT_2;
    [[C64::new(H, 0.0), C64::new(H, 0.0)], [C64::new(H, 0.0), C64::new(-H, 0.0)]]
};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString(Vec<Pauli>);

/// Bit masks describing how a Pauli string acts on basis states:
/// `P|k⟩ = i^{n_y} (-1)^{popcount(k & z)} |k ^ x⟩`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PauliMasks {
    pub x: usize,
    pub z: usize,
    pub n_y: u32,
}

impl PauliMasks {
    #[inline]
    pub fn phase(&self, k: usize) -> C64 {
        let sign = if (k & self.z).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        match self.n_y % 4 {
            0 => C64::new(sign, 0.0),
            1 => C64::new(0.0, sign),
            2 => C64::new(-sign, 0.0),
            _ => C64::new(0.0, -sign),
        }
    }
}

impl PauliString {
    pub fn new(paulis: Vec<Pauli>) -> Self {
        Self(paulis)
    }

    pub fn identity(n: usize) -> Self {
        Self(vec![Pauli::I; n])
    }

    /// From numeric indices `0=I, 1=X, 2=Y, 3=Z`.
    pub fn from_indices(indices: &[u8]) -> Result<Self> {
        indices.iter().map(|&i| Pauli::from_index(i)).collect::<Result<Vec<_>>>().map(Self)
    }

    /// A string that is the identity everywhere except the listed qubits.
    pub fn with_terms(n: usize, terms: &[(usize, Pauli)]) -> Result<Self> {
        let mut p = vec![Pauli::I; n];
        for &(q, op) in terms {
            if q >= n {
                return Err(Error::QubitOutOfRange { index: q, num_qubits: n });
            }
            p[q] = op;
        }
        Ok(Self(p))
    }

    pub fn single(n: usize, qubit: usize, op: Pauli) -> Result<Self> {
        Self::with_terms(n, &[(qubit, op)])
    }

    pub fn num_qubits(&self) -> usize {
        self.0.len()
    }

    pub fn paulis(&self) -> &[Pauli] {
        &self.0
    }

    pub fn indices(&self) -> Vec<u8> {
        self.0.iter().map(|p| p.index()).collect()
    }

    pub fn locality(&self) -> usize {
        self.0.iter().filter(|&&p| p != Pauli::I).count()
    }

    /// Qubits carrying a non-identity factor, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.0.iter().enumerate().filter(|(_, &p)| p != Pauli::I).map(|(q, _)| q).collect()
    }

    pub fn support_mask(&self) -> usize {
        self.support().iter().fold(0, |m, q| m | (1usize << q))
    }

    /// Every non-identity factor replaced by `Z`.
    pub fn three_bar(&self) -> Self {
        Self(self.0.iter().map(|&p| if p == Pauli::I { Pauli::I } else { Pauli::Z }).collect())
    }

    /// Only `Y` factors replaced by `Z`.
    pub fn three_bar_two(&self) -> Self {
        Self(self.0.iter().map(|&p| if p == Pauli::Y { Pauli::Z } else { p }).collect())
    }

    /// True when every factor is `I` or `Z`.
    pub fn is_diagonal(&self) -> bool {
        self.0.iter().all(|&p| matches!(p, Pauli::I | Pauli::Z))
    }

    pub(crate) fn masks(&self) -> PauliMasks {
        let mut m = PauliMasks { x: 0, z: 0, n_y: 0 };
        for (q, &p) in self.0.iter().enumerate() {
            match p {
                Pauli::I => {}
                Pauli::X => m.x |= 1 << q,
                Pauli::Z => m.z |= 1 << q,
                Pauli::Y => {
                    m.x |= 1 << q;
                    m.z |= 1 << q;
                    m.n_y += 1;
                }
            }
        }
        m
    }

    /// `P|ψ⟩`
    pub fn apply(&self, state: &PureState) -> Result<PureState> {
        state.check_same_width(self.num_qubits())?;
        let m = self.masks();
        let src = state.amplitudes();
        let mut out = state.clone();
        let dst = out.amplitudes_mut();
        for (k, a) in src.iter().enumerate() {
            dst[k ^ m.x] = m.phase(k) * a;
        }
        Ok(out)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c.to_ascii_uppercase() {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::InvalidArgument(format!("unexpected Pauli character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `⟨ψ|P|ψ⟩`
pub fn expectation_exact(state: &PureState, p: &PauliString) -> Result<f64> {
    state.check_same_width(p.num_qubits())?;
    let m = p.masks();
    let a = state.amplitudes();
    let mut acc = 0.0;
    for (k, ak) in a.iter().enumerate() {
        acc += (a[k ^ m.x].conj() * m.phase(k) * ak).re;
    }
    Ok(acc)
}

/// Finite-shot estimate of `⟨ψ|P|ψ⟩`: rotate the support into the Z basis,
/// sample `shots` bitstrings from the Born distribution and average the
/// product of the `±1` eigenvalues on the support.
pub fn expectation_shots<R: Rng + ?Sized>(
    state: &PureState,
    p: &PauliString,
    shots: usize,
    rng: &mut R,
) -> Result<f64> {
    state.check_same_width(p.num_qubits())?;
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be >= 1".into()));
    }
    let support = p.support_mask();
    if support == 0 {
        return Ok(1.0);
    }
    let rotated;
    let amps = if p.is_diagonal() {
        state.amplitudes()
    } else {
        let mut s = state.clone();
        for (q, &op) in p.paulis().iter().enumerate() {
            match op {
                Pauli::X => kernel::unitary(s.amplitudes_mut(), q, &X_BASIS_CHANGE),
                Pauli::Y => kernel::unitary(s.amplitudes_mut(), q, &Y_BASIS_CHANGE),
                _ => {}
            }
        }
        rotated = s;
        rotated.amplitudes()
    };
    let mut cumulative = Vec::with_capacity(amps.len());
    let mut total = 0.0;
    for a in amps {
        total += a.norm_sqr();
        cumulative.push(total);
    }
    let last = amps.len() - 1;
    let mut sum: i64 = 0;
    for _ in 0..shots {
        let u: f64 = rng.gen::<f64>() * total;
        let k = cumulative.partition_point(|&c| c <= u).min(last);
        sum += if (k & support).count_ones() % 2 == 0 { 1 } else { -1 };
    }
    Ok(sum as f64 / shots as f64)
}

/// Weighted sum of Pauli strings with real coefficients. Duplicate strings
/// are merged on construction, keeping first-insertion order.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    num_qubits: usize,
    terms: Vec<(f64, PauliString)>,
}

impl Hamiltonian {
    pub fn new(num_qubits: usize, terms: impl IntoIterator<Item = (f64, PauliString)>) -> Result<Self> {
        let mut merged: Vec<(f64, PauliString)> = Vec::new();
        for (c, p) in terms {
            if p.num_qubits() != num_qubits {
                return Err(Error::DimensionMismatch { expected: num_qubits, got: p.num_qubits() });
            }
            if !c.is_finite() {
                return Err(Error::InvalidArgument(format!("non-finite coefficient on {p}")));
            }
            match merged.iter_mut().find(|(_, q)| *q == p) {
                Some((acc, _)) => *acc += c,
                None => merged.push((c, p)),
            }
        }
        Ok(Self { num_qubits, terms: merged })
    }

    pub fn empty(num_qubits: usize) -> Self {
        Self { num_qubits, terms: Vec::new() }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    /// Exact `⟨ψ|H|ψ⟩`, or with `Some((shots, rng))` each term estimated
    /// independently from `shots` samples.
    pub fn expectation<R: Rng + ?Sized>(&self, state: &PureState, shots: Option<(usize, &mut R)>) -> Result<f64> {
        state.check_same_width(self.num_qubits)?;
        let mut acc = 0.0;
        match shots {
            None => {
                for (c, p) in &self.terms {
                    acc += c * expectation_exact(state, p)?;
                }
            }
            Some((n, rng)) => {
                for (c, p) in &self.terms {
                    acc += c * expectation_shots(state, p, n, rng)?;
                }
            }
        }
        Ok(acc)
    }

    /// `H|ψ⟩` as a raw (unnormalized) amplitude vector.
    pub fn apply_raw(&self, amps: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); amps.len()];
        for (c, p) in &self.terms {
            let m = p.masks();
            for (k, a) in amps.iter().enumerate() {
                out[k ^ m.x] += m.phase(k) * a * *c;
            }
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.json_terms())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let terms: Vec<HamiltonianTerm> = serde_json::from_str(text)?;
        let n = terms.first().map(|t| t.pauli.num_qubits()).ok_or_else(|| {
            Error::InvalidArgument("empty Hamiltonian JSON carries no qubit count".into())
        })?;
        Self::new(n, terms.into_iter().map(|t| (t.coeff, t.pauli)))
    }

    fn json_terms(&self) -> Vec<HamiltonianTerm> {
        self.terms.iter().map(|(c, p)| HamiltonianTerm { coeff: *c, pauli: p.clone() }).collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HamiltonianTerm {
    coeff: f64,
    pauli: PauliString,
}

/// `H = -(1/N) Σ Z_i Z_{i+1} - (1/N) Σ X_i` on a ring (`Z_N ≡ Z_0`).
pub fn ising_hamiltonian(n: usize) -> Result<Hamiltonian> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("Ising ring needs N >= 2, got {n}")));
    }
    let c = -1.0 / n as f64;
    let mut terms = Vec::with_capacity(2 * n);
    for i in 0..n {
        terms.push((c, PauliString::with_terms(n, &[(i, Pauli::Z), ((i + 1) % n, Pauli::Z)])?));
    }
    for i in 0..n {
        terms.push((c, PauliString::single(n, i, Pauli::X)?));
    }
    Hamiltonian::new(n, terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;
    use crate::state::Axis;

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn exact_expectation_examples() {
        let zero = PureState::zero(2).unwrap();
        assert_eq!(expectation_exact(&zero, &ps("ZI")).unwrap(), 1.0);
        assert_eq!(expectation_exact(&zero, &ps("XI")).unwrap(), 0.0);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = PureState::from_amplitudes(vec![
            C64::new(h, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(h, 0.0),
        ])
        .unwrap();
        assert!((expectation_exact(&bell, &ps("ZZ")).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(
            expectation_exact(&zero, &ps("ZZZ")),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn y_basis_change_maps_y_to_z() {
        let u = Y_BASIS_CHANGE;
        let y = [[C64::new(0.0, 0.0), C64::new(0.0, -1.0)], [C64::new(0.0, 1.0), C64::new(0.0, 0.0)]];
        let udag = [[u[0][0].conj(), u[1][0].conj()], [u[0][1].conj(), u[1][1].conj()]];
        let m = crate::state::matmul2(&crate::state::matmul2(&u, &y), &udag);
        assert!((m[0][0] - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((m[1][1] - C64::new(-1.0, 0.0)).norm() < 1e-15);
        assert!(m[0][1].norm() < 1e-15 && m[1][0].norm() < 1e-15);
    }

    #[test]
    fn deterministic_shot_outcome() {
        let zero = PureState::zero(1).unwrap();
        let mut rng = seed::stream(1, &[]);
        assert_eq!(expectation_shots(&zero, &ps("Z"), 17, &mut rng).unwrap(), 1.0);
        assert!(expectation_shots(&zero, &ps("Z"), 0, &mut rng).is_err());
    }

    #[test]
    fn x_shots_on_zero_state_within_binomial_error() {
        let zero = PureState::zero(1).unwrap();
        let mut rng = seed::stream(2, &[]);
        let est = expectation_shots(&zero, &ps("X"), 100_000, &mut rng).unwrap();
        assert!(est.abs() < 3.0 * (1.0f64 / 100_000.0).sqrt(), "estimate {est}");
    }

    #[test]
    fn shots_converge_for_y_observable() {
        let mut psi = PureState::zero(2).unwrap();
        psi.apply_rotation(Axis::X, 0.3, 0).unwrap();
        psi.apply_rotation(Axis::Y, 1.1, 1).unwrap();
        psi.apply_cnot(0, 1).unwrap();
        let p = ps("YX");
        let exact = expectation_exact(&psi, &p).unwrap();
        let mut rng = seed::stream(3, &[]);
        let est = expectation_shots(&psi, &p, 1_000_000, &mut rng).unwrap();
        assert!((est - exact).abs() < 0.01, "{est} vs {exact}");
    }

    #[test]
    fn ising_construction() {
        let h2 = ising_hamiltonian(2).unwrap();
        assert_eq!(h2.terms().len(), 3);
        assert_eq!(h2.terms()[0], (-1.0, ps("ZZ")));
        assert_eq!(h2.terms()[1], (-0.5, ps("XI")));
        assert_eq!(h2.terms()[2], (-0.5, ps("IX")));
        let h3 = ising_hamiltonian(3).unwrap();
        assert_eq!(h3.terms().len(), 6);
        assert!(h3.terms().iter().all(|(c, _)| (*c + 1.0 / 3.0).abs() < 1e-15));
        assert!(ising_hamiltonian(1).is_err());
        let e = h2.expectation::<seed::StreamRng>(&PureState::zero(2).unwrap(), None).unwrap();
        assert!((e + 1.0).abs() < 1e-15);
    }

    #[test]
    fn hamiltonian_edge_cases() {
        let zero = PureState::zero(2).unwrap();
        let empty = Hamiltonian::empty(2);
        assert_eq!(empty.expectation::<seed::StreamRng>(&zero, None).unwrap(), 0.0);
        let h = Hamiltonian::new(2, [(1.0, ps("ZI"))]).unwrap();
        assert_eq!(h.expectation::<seed::StreamRng>(&zero, None).unwrap(), 1.0);
        assert!(Hamiltonian::new(2, [(1.0, ps("Z"))]).is_err());
    }

    #[test]
    fn hamiltonian_json_round_trip() {
        let h = ising_hamiltonian(4).unwrap();
        let text = h.to_json().unwrap();
        assert!(text.contains("\"pauli\": \"ZZII\""));
        assert_eq!(Hamiltonian::from_json(&text).unwrap(), h);
        assert!(Hamiltonian::from_json(r#"[{"coeff":1.0,"pauli":"ZQ"}]"#).is_err());
        assert!(Hamiltonian::from_json(r#"[{"coeff":1.0,"pauli":"ZI","x":1}]"#).is_err());
    }

    #[test]
    fn index_maps() {
        let p = PauliString::from_indices(&[1, 2, 0]).unwrap();
        assert_eq!(p.three_bar().indices(), vec![3, 3, 0]);
        assert_eq!(p.three_bar_two().indices(), vec![1, 3, 0]);
        assert_eq!(PauliString::from_indices(&[0, 0]).unwrap().three_bar().indices(), vec![0, 0]);
        assert_eq!(PauliString::from_indices(&[3, 3]).unwrap().three_bar().indices(), vec![3, 3]);
        assert_eq!(PauliString::from_indices(&[2, 2]).unwrap().three_bar_two().indices(), vec![3, 3]);
        assert_eq!(PauliString::from_indices(&[1, 3, 0]).unwrap().three_bar_two().indices(), vec![1, 3, 0]);
        assert_eq!(p.locality(), 2);
        assert!(PauliString::from_indices(&[4]).is_err());
    }

    #[test]
    fn text_form() {
        let p = ps("zIxY");
        assert_eq!(p.to_string(), "ZIXY");
        assert_eq!(p.support(), vec![0, 2, 3]);
        assert!("ZA".parse::<PauliString>().is_err());
    }
}
