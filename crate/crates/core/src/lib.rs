//! Controlled-layer quantum neural networks: dense simulation, gradient
//! diagnostics, lower-bound checks and the training experiments built on them.

pub mod circuit;
pub mod error;
pub mod experiments;
pub mod gradients;
pub mod noise;
pub mod optim;
pub mod pauli;
pub mod report;
pub mod seed;
pub mod state;
pub mod theory;

pub use circuit::{
    build_cl_qnn, build_he_ansatz, build_random_qnn, ClLayout, GateBudget, GateOp, InnerAnsatz, ParamCircuit,
    ParameterVector,
};
pub use error::{Error, Result};
pub use experiments::{AnsatzKind, InitKind};
pub use gradients::{grad_norm_sq, EvalMode, LossEvaluator, Observable};
pub use noise::{MixedState, MAX_NOISY_QUBITS};
pub use optim::{OptimizerKind, RunRecord, TrainConfig};
pub use pauli::{ising_hamiltonian, Hamiltonian, Pauli, PauliString};
pub use state::{Axis, PureState, SingleQubitUnitary, C64, MAX_QUBITS};
pub use theory::BoundReport;
