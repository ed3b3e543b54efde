use thiserror::Error;

use crate::network::NetworkError;

/// Failures of the equilibrium, dynamics and paradox analyses.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("state space has {states} joint strategies, above the cap of {cap}")]
    StateCapExceeded { states: String, cap: u64 },
    #[error("underlying graph is not a simple cycle: {0}")]
    NotSimpleCycle(String),
    #[error("joint strategy {0} is not a Nash equilibrium of the base game")]
    NotNash(String),
    #[error("scheduler order must list every node exactly once: {0}")]
    InvalidOrder(String),
    #[error("max_steps must be at least 1")]
    ZeroStepBudget,
    #[error("step {index} ({step}) is not a profitable deviation")]
    NotProfitable { index: usize, step: String },
    #[error("invalid edit: {0}")]
    InvalidEdit(String),
    #[error(transparent)]
    Network(#[from] NetworkError),
}
