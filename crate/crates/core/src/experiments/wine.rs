//! Binary classification of two wine cultivars with angle-embedded inputs
//! and an `ℓ1` loss on `⟨Z_0⟩`.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{AnsatzKind, AnsatzShape};
use crate::circuit::{init_uniform, GateBudget, InnerAnsatz, ParamCircuit};
use crate::error::{invalid, Error, Result};
use crate::gradients::{EvalMode, LossEvaluator};
use crate::optim::{train, Objective, OptimizerKind, RunRecord, TrainConfig, TrainStatus};
use crate::pauli::{Pauli, PauliString};
use crate::seed;
use crate::state::{PureState, C64};

pub const NUM_FEATURES: usize = 13;
/// Samples per class in each of the train and test splits.
pub const PER_CLASS: usize = 29;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub features: Vec<f64>,
    /// `+1` for the first class of the pair, `-1` for the second.
    pub label: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WineDataset {
    pub class_pair: (u32, u32),
    pub train: Vec<Sample>,
    pub test: Vec<Sample>,
}

/// Rows of `label,f1,…,f13`; blank lines are skipped.
pub fn parse_wine(text: &str) -> Result<Vec<(u32, Vec<f64>)>> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != NUM_FEATURES + 1 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected {} columns, found {}", NUM_FEATURES + 1, cols.len()),
            });
        }
        let label: u32 = cols[0]
            .parse()
            .map_err(|_| Error::Parse { line: line_no, message: format!("class label '{}' is not an integer", cols[0]) })?;
        let features = cols[1..]
            .iter()
            .map(|c| match c.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::Parse { line: line_no, message: format!("feature '{c}' is not a finite number") }),
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push((label, features));
    }
    Ok(rows)
}

pub fn load_wine(path: &Path, class_pair: Option<(u32, u32)>, seed_value: u64) -> Result<WineDataset> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Data(format!("cannot read wine data at {}: {e}", path.display())))?;
    split_wine(&parse_wine(&text)?, class_pair, seed_value)
}

/// Class pair defaults to the first two labels in file order. Each class
/// is shuffled with a seeded stream; the first 29 go to train, the next 29
/// to test. Features are min-max scaled to `[0, π]` with training-set
/// statistics, test values clamped.
pub fn split_wine(rows: &[(u32, Vec<f64>)], class_pair: Option<(u32, u32)>, seed_value: u64) -> Result<WineDataset> {
    let pair = match class_pair {
        Some(p) if p.0 == p.1 => return Err(invalid(format!("class pair ({}, {}) repeats a class", p.0, p.1))),
        Some(p) => p,
        None => {
            let mut labels: Vec<u32> = Vec::new();
            for (l, _) in rows {
                if !labels.contains(l) {
                    labels.push(*l);
                }
            }
            if labels.len() < 2 {
                return Err(Error::Data(format!("need at least two classes, found {}", labels.len())));
            }
            (labels[0], labels[1])
        }
    };
    let mut train = Vec::with_capacity(2 * PER_CLASS);
    let mut test = Vec::with_capacity(2 * PER_CLASS);
    for (k, (class, label)) in [(pair.0, 1.0), (pair.1, -1.0)].into_iter().enumerate() {
        let mut members: Vec<&Vec<f64>> = rows.iter().filter(|(l, _)| *l == class).map(|(_, f)| f).collect();
        if members.len() < 2 * PER_CLASS {
            return Err(Error::Data(format!(
                "class {class} has {} samples; the split needs {}",
                members.len(),
                2 * PER_CLASS
            )));
        }
        members.shuffle(&mut seed::stream(seed_value, &[k as u64]));
        let to_sample = |f: &&Vec<f64>| Sample { features: f.to_vec(), label };
        train.extend(members[..PER_CLASS].iter().map(to_sample));
        test.extend(members[PER_CLASS..2 * PER_CLASS].iter().map(to_sample));
    }
    scale_features(&mut train, &mut test);
    Ok(WineDataset { class_pair: pair, train, test })
}

fn scale_features(train: &mut [Sample], test: &mut [Sample]) {
    for j in 0..NUM_FEATURES {
        let (lo, hi) = train
            .iter()
            .map(|s| s.features[j])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        let span = hi - lo;
        for s in train.iter_mut().chain(test.iter_mut()) {
            let x = &mut s.features[j];
            *x = if span > 0.0 { ((*x - lo) / span * std::f64::consts::PI).clamp(0.0, std::f64::consts::PI) } else { 0.0 };
        }
    }
}

/// `⊗_j R_Y(x_j)|0⟩`, with `x_0` on qubit 0.
pub fn qubit_embed(x: &[f64]) -> Result<PureState> {
    let factors: Vec<[C64; 2]> = x.iter().map(|&t| [C64::new(t.cos(), 0.0), C64::new(t.sin(), 0.0)]).collect();
    PureState::product(&factors)
}

fn check_batch(circuit: &ParamCircuit, batch: &[Sample]) -> Result<()> {
    if batch.is_empty() {
        return Err(invalid("empty batch"));
    }
    for s in batch {
        if s.features.len() != circuit.num_qubits() {
            return Err(Error::DimensionMismatch { expected: circuit.num_qubits(), got: s.features.len() });
        }
    }
    Ok(())
}

fn evaluator<'c>(circuit: &'c ParamCircuit) -> Result<LossEvaluator<'c>> {
    let n = circuit.num_qubits();
    LossEvaluator::new(circuit, PauliString::single(n, 0, Pauli::Z)?, PureState::zero(n)?)
}

/// `⟨Z_0⟩` for one sample: exact when `shots` is `None`.
fn predict<R: Rng + ?Sized>(
    eval: &LossEvaluator<'_>,
    theta: &[f64],
    x: &[f64],
    shots: Option<(usize, &mut R)>,
) -> Result<f64> {
    let e = eval.with_input(qubit_embed(x)?)?;
    match shots {
        None => e.eval(theta),
        Some((n, rng)) => e.eval_shots(theta, n, rng),
    }
}

/// `(1/|A|) Σ |⟨Z_0⟩_i - y_i|`.
pub fn qml_loss<R: Rng + ?Sized>(
    circuit: &ParamCircuit,
    theta: &[f64],
    batch: &[Sample],
    shots: Option<usize>,
    rng: &mut R,
) -> Result<f64> {
    check_batch(circuit, batch)?;
    let eval = evaluator(circuit)?;
    let mut acc = 0.0;
    for s in batch {
        let v = predict(&eval, theta, &s.features, shots.map(|n| (n, &mut *rng)))?;
        acc += (v - s.label).abs();
    }
    Ok(acc / batch.len() as f64)
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Subgradient `(1/|A|) Σ sign(⟨Z_0⟩_i - y_i) ∂⟨Z_0⟩_i`. In shot mode the
/// sign comes from a fresh estimate, independent of the derivative shots.
pub fn qml_grad(circuit: &ParamCircuit, theta: &[f64], batch: &[Sample], mode: EvalMode) -> Result<Vec<f64>> {
    check_batch(circuit, batch)?;
    let eval = evaluator(circuit)?;
    let mut grad = vec![0.0; circuit.param_count()];
    for (i, s) in batch.iter().enumerate() {
        let e = eval.with_input(qubit_embed(&s.features)?)?;
        let (value, sample_mode) = match mode {
            EvalMode::Exact => (e.eval(theta)?, EvalMode::Exact),
            EvalMode::Shots { shots, seed: sd } => (
                e.eval_shots(theta, shots, &mut seed::stream(sd, &[i as u64, 0]))?,
                EvalMode::Shots { shots, seed: seed::derive(sd, &[i as u64, 1]) },
            ),
        };
        let sg = sign(value - s.label);
        if sg == 0.0 {
            continue;
        }
        for (g, d) in grad.iter_mut().zip(e.param_shift_grad(theta, sample_mode)?) {
            *g += sg * d;
        }
    }
    let m = batch.len() as f64;
    grad.iter_mut().for_each(|g| *g /= m);
    Ok(grad)
}

/// Misclassification rate of `sign(⟨Z_0⟩)` with exact expectations;
/// `⟨Z_0⟩ = 0` counts as an error.
pub fn classification_error(circuit: &ParamCircuit, theta: &[f64], split: &[Sample]) -> Result<f64> {
    check_batch(circuit, split)?;
    let eval = evaluator(circuit)?;
    let mut wrong = 0usize;
    for s in split {
        let v = predict::<seed::StreamRng>(&eval, theta, &s.features, None)?;
        if sign(v) != s.label {
            wrong += 1;
        }
    }
    Ok(wrong as f64 / split.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WineConfig {
    pub ansatz: AnsatzKind,
    pub blocks: usize,
    pub inner_layers: usize,
    pub he_layers: usize,
    pub train: TrainConfig,
}

impl WineConfig {
    /// CL `L=2` with inner HE `L_HE=5`, HE comparison `L_HE=10`; Adam
    /// (lr 0.01), batch 8, 100 shots, 200 iterations.
    pub fn standard(ansatz: AnsatzKind, seed: u64) -> Self {
        Self {
            ansatz,
            blocks: 2,
            inner_layers: 5,
            he_layers: 10,
            train: TrainConfig {
                iterations: 200,
                shots: 100,
                batch_size: Some(8),
                seed,
                optimizer: OptimizerKind::adam(0.01),
            },
        }
    }

    fn shape(&self) -> AnsatzShape {
        AnsatzShape {
            blocks: self.blocks,
            s: 1,
            inner: InnerAnsatz::HardwareEfficient { layers: self.inner_layers },
            he_layers: self.he_layers,
        }
    }

    pub fn circuit(&self) -> Result<ParamCircuit> {
        self.shape().build(self.ansatz, NUM_FEATURES, &mut seed::stream(self.train.seed, &[0]))
    }
}

struct WineObjective<'a> {
    circuit: &'a ParamCircuit,
    data: &'a WineDataset,
    shots: usize,
    batch_size: usize,
}

impl Objective for WineObjective<'_> {
    fn param_count(&self) -> usize {
        self.circuit.param_count()
    }

    fn loss(&self, theta: &[f64], _iteration: usize, seed_value: u64) -> Result<f64> {
        qml_loss(self.circuit, theta, &self.data.train, Some(self.shots), &mut seed::stream(seed_value, &[]))
    }

    fn gradient(&self, theta: &[f64], _iteration: usize, seed_value: u64) -> Result<Vec<f64>> {
        let batch: Vec<Sample> = self
            .data
            .train
            .choose_multiple(&mut seed::stream(seed_value, &[0]), self.batch_size)
            .cloned()
            .collect();
        qml_grad(self.circuit, theta, &batch, EvalMode::Shots { shots: self.shots, seed: seed::derive(seed_value, &[1]) })
    }

    fn test_error(&self, theta: &[f64]) -> Result<Option<f64>> {
        classification_error(self.circuit, theta, &self.data.test).map(Some)
    }

    fn exact_loss(&self, theta: &[f64]) -> Result<Option<f64>> {
        qml_loss(self.circuit, theta, &self.data.train, None, &mut seed::stream(0, &[]))
            .map(Some)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationRun {
    pub gate_budget: GateBudget,
    pub param_count: usize,
    pub records: Vec<RunRecord>,
    pub status: TrainStatus,
}

/// Records per iteration: shot-estimated loss on the full training split,
/// the mini-batch gradient norm, the exact test error and the exact
/// training loss.
pub fn classification_experiment(data: &WineDataset, config: &WineConfig) -> Result<ClassificationRun> {
    let circuit = config.circuit()?;
    let batch_size = config.train.batch_size.unwrap_or(8);
    if batch_size > data.train.len() {
        return Err(invalid(format!("batch size {batch_size} exceeds training split of {}", data.train.len())));
    }
    let objective = WineObjective { circuit: &circuit, data, shots: config.train.shots, batch_size };
    let theta0 = init_uniform(circuit.param_count(), &mut seed::stream(config.train.seed, &[1]));
    let train_cfg = TrainConfig { seed: seed::derive(config.train.seed, &[2]), ..config.train };
    let outcome = train(&objective, &theta0, &train_cfg)?;
    Ok(ClassificationRun {
        gate_budget: circuit.gate_budget(),
        param_count: circuit.param_count(),
        records: outcome.records,
        status: outcome.status,
    })
}
