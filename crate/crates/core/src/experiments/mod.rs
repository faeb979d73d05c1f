//! The three studies: toy gradient scans, Ising ground-state search and
//! wine classification.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{build_cl_qnn, build_he_ansatz, build_random_qnn, GateBudget, InnerAnsatz, ParamCircuit};
use crate::error::{invalid, Error, Result};

pub mod ising;
pub mod toy;
pub mod wine;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnsatzKind {
    Cl,
    He,
    Random,
}

impl AnsatzKind {
    pub const ALL: [AnsatzKind; 3] = [AnsatzKind::Cl, AnsatzKind::He, AnsatzKind::Random];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Cl => "cl",
            Self::He => "he",
            Self::Random => "random",
        }
    }

    /// Stable index used in seed paths.
    pub fn code(self) -> u64 {
        self as u64
    }
}

impl fmt::Display for AnsatzKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AnsatzKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cl" => Ok(Self::Cl),
            "he" => Ok(Self::He),
            "random" => Ok(Self::Random),
            other => Err(invalid(format!("unknown ansatz '{other}' (expected cl, he or random)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitKind {
    #[default]
    Uniform,
    HaarLocal,
}

impl InitKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Uniform => "uniform",
            Self::HaarLocal => "haar-local",
        }
    }
}

impl fmt::Display for InitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InitKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "haar" | "haar-local" => Ok(Self::HaarLocal),
            other => Err(invalid(format!("unknown init '{other}' (expected uniform or haar-local)"))),
        }
    }
}

/// Shape shared by the CL circuit and its HE / Random comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsatzShape {
    /// CL blocks `L`.
    pub blocks: usize,
    /// Observable locality `S`.
    pub s: usize,
    pub inner: InnerAnsatz,
    /// Layers of the standalone HE comparison.
    pub he_layers: usize,
}

impl AnsatzShape {
    /// Reference CL circuit: its gate counts fix the Random budget.
    pub fn cl_circuit(&self, n: usize) -> Result<ParamCircuit> {
        build_cl_qnn(n, self.s, self.blocks, self.inner)
    }

    pub fn random_budget(&self, n: usize) -> Result<GateBudget> {
        Ok(self.cl_circuit(n)?.gate_budget())
    }

    /// `rng` is only drawn from for the Random ansatz.
    pub fn build<R: Rng + ?Sized>(&self, kind: AnsatzKind, n: usize, rng: &mut R) -> Result<ParamCircuit> {
        match kind {
            AnsatzKind::Cl => self.cl_circuit(n),
            AnsatzKind::He => build_he_ansatz(n, self.he_layers),
            AnsatzKind::Random => build_random_qnn(n, self.random_budget(n)?, rng),
        }
    }
}

pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_odd_even() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!(median(&[]).is_nan());
    }

    #[test]
    fn parse_kinds() {
        assert_eq!("CL".parse::<AnsatzKind>().unwrap(), AnsatzKind::Cl);
        assert!("tree".parse::<AnsatzKind>().is_err());
        assert_eq!("haar".parse::<InitKind>().unwrap(), InitKind::HaarLocal);
    }
}
