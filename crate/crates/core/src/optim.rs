//! SGD and Adam, and a training loop that records per-iteration telemetry.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::gradients::grad_norm_sq;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OptimizerKind {
    Sgd {
        lr: f64,
    },
    Adam {
        lr: f64,
        #[serde(default = "default_beta1")]
        beta1: f64,
        #[serde(default = "default_beta2")]
        beta2: f64,
        #[serde(default = "default_eps")]
        eps: f64,
    },
}

fn default_beta1() -> f64 {
    0.9
}
fn default_beta2() -> f64 {
    0.999
}
fn default_eps() -> f64 {
    1e-8
}

impl OptimizerKind {
    pub fn sgd(lr: f64) -> Self {
        Self::Sgd { lr }
    }

    /// Adam with `(β1, β2, ε) = (0.9, 0.999, 1e-8)`.
    pub fn adam(lr: f64) -> Self {
        Self::Adam { lr, beta1: default_beta1(), beta2: default_beta2(), eps: default_eps() }
    }

    pub fn lr(&self) -> f64 {
        match *self {
            Self::Sgd { lr } | Self::Adam { lr, .. } => lr,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Sgd { .. } => "sgd",
            Self::Adam { .. } => "adam",
        }
    }

    fn validate(&self) -> Result<()> {
        let lr = self.lr();
        if !(lr >= 0.0 && lr.is_finite()) {
            return Err(invalid(format!("learning rate must be finite and non-negative, got {lr}")));
        }
        if let Self::Adam { beta1, beta2, eps, .. } = *self {
            if !(0.0..1.0).contains(&beta1) || !(0.0..1.0).contains(&beta2) || !(eps > 0.0) {
                return Err(invalid(format!("invalid Adam hyperparameters ({beta1}, {beta2}, {eps})")));
            }
        }
        Ok(())
    }
}

/// `θ' = θ - lr·g`
pub fn sgd_step(theta: &[f64], grad: &[f64], lr: f64) -> Vec<f64> {
    theta.iter().zip(grad).map(|(t, g)| t - lr * g).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    kind: OptimizerKind,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl OptimizerState {
    pub fn new(kind: OptimizerKind, param_count: usize) -> Result<Self> {
        kind.validate()?;
        Ok(Self { kind, m: vec![0.0; param_count], v: vec![0.0; param_count], t: 0 })
    }

    pub fn kind(&self) -> OptimizerKind {
        self.kind
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    /// Updates `theta` in place.
    pub fn step(&mut self, theta: &mut [f64], grad: &[f64]) -> Result<()> {
        if theta.len() != self.m.len() || grad.len() != self.m.len() {
            return Err(invalid(format!(
                "optimizer holds {} parameters, got theta {} and gradient {}",
                self.m.len(),
                theta.len(),
                grad.len()
            )));
        }
        self.t += 1;
        match self.kind {
            OptimizerKind::Sgd { lr } => {
                for (t, g) in theta.iter_mut().zip(grad) {
                    *t -= lr * g;
                }
            }
            OptimizerKind::Adam { lr, beta1, beta2, eps } => {
                let c1 = 1.0 - beta1.powi(self.t as i32);
                let c2 = 1.0 - beta2.powi(self.t as i32);
                for j in 0..theta.len() {
                    self.m[j] = beta1 * self.m[j] + (1.0 - beta1) * grad[j];
                    self.v[j] = beta2 * self.v[j] + (1.0 - beta2) * grad[j] * grad[j];
                    let m_hat = self.m[j] / c1;
                    let v_hat = self.v[j] / c2;
                    theta[j] -= lr * m_hat / (v_hat.sqrt() + eps);
                }
            }
        }
        Ok(())
    }
}

/// Functional form of one Adam update.
pub fn adam_step(state: &OptimizerState, theta: &[f64], grad: &[f64]) -> Result<(OptimizerState, Vec<f64>)> {
    let mut s = state.clone();
    let mut t = theta.to_vec();
    s.step(&mut t, grad)?;
    Ok((s, t))
}

/// A training problem. `iteration` and `seed` identify the random streams
/// the call may use, so traces are reproducible.
pub trait Objective {
    fn param_count(&self) -> usize;
    /// Loss value recorded for the iteration (typically shot-estimated).
    fn loss(&self, theta: &[f64], iteration: usize, seed: u64) -> Result<f64>;
    fn gradient(&self, theta: &[f64], iteration: usize, seed: u64) -> Result<Vec<f64>>;
    fn test_error(&self, _theta: &[f64]) -> Result<Option<f64>> {
        Ok(None)
    }
    /// Noise-free loss, when cheap enough to record.
    fn exact_loss(&self, _theta: &[f64]) -> Result<Option<f64>> {
        Ok(None)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub iterations: usize,
    pub shots: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batch_size: Option<usize>,
    pub seed: u64,
    pub optimizer: OptimizerKind,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(invalid("iterations must be at least 1"));
        }
        if self.shots == 0 {
            return Err(invalid("shots must be at least 1"));
        }
        if self.batch_size == Some(0) {
            return Err(invalid("batch_size must be at least 1"));
        }
        self.optimizer.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub iteration: usize,
    pub loss: f64,
    pub grad_norm: f64,
    pub test_error: Option<f64>,
    pub exact_loss: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TrainStatus {
    Completed,
    /// Loss or gradient became non-finite; the last record is the one that
    /// triggered the abort.
    Diverged { iteration: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub records: Vec<RunRecord>,
    pub theta: Vec<f64>,
    pub status: TrainStatus,
}

/// Per iteration: record the loss and gradient norm at the current point,
/// then take one optimizer step. Iteration `k` draws from streams derived
/// from `(seed, k)`.
pub fn train(objective: &dyn Objective, theta0: &[f64], config: &TrainConfig) -> Result<TrainOutcome> {
    config.validate()?;
    if theta0.len() != objective.param_count() {
        return Err(invalid(format!("expected {} parameters, got {}", objective.param_count(), theta0.len())));
    }
    let mut opt = OptimizerState::new(config.optimizer, theta0.len())?;
    let mut theta = theta0.to_vec();
    let mut records = Vec::with_capacity(config.iterations);
    for k in 0..config.iterations {
        let loss = objective.loss(&theta, k, seed::derive(config.seed, &[k as u64, 0]))?;
        let grad = objective.gradient(&theta, k, seed::derive(config.seed, &[k as u64, 1]))?;
        let grad_norm = grad_norm_sq(&grad).sqrt();
        let record = RunRecord {
            iteration: k,
            loss,
            grad_norm,
            test_error: objective.test_error(&theta)?,
            exact_loss: objective.exact_loss(&theta)?,
        };
        records.push(record);
        if !loss.is_finite() || !grad_norm.is_finite() {
            return Ok(TrainOutcome { records, theta, status: TrainStatus::Diverged { iteration: k } });
        }
        opt.step(&mut theta, &grad)?;
    }
    Ok(TrainOutcome { records, theta, status: TrainStatus::Completed })
}
