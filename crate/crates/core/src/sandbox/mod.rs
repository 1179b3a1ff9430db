//! Deterministic, hermetic interpreter for parsed programs.
//!
//! Execution is bounded by an interpreter step budget rather than wall-clock
//! time so that "timeout" outcomes reproduce exactly across machines.

mod drift;
mod interp;

pub use drift::{base_shear, drift_proxy, DriftResult, GRAVITY};
pub use interp::{execute, execute_source, execute_traced, TraceLine};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SandboxConfig {
    /// Interpreter step budget.
    pub budget: u64,
    /// Inter-story drift ratio limit for the `analyze` verdict.
    pub drift_limit: f64,
    /// Peak ground acceleration (g) used to derive the static lateral load.
    pub pga: f64,
    /// Fraction of the design-level PGA applied in the drift check.
    pub drift_load_factor: f64,
}

impl Default for SandboxConfig {
    fn default() -> Self {
        Self {
            budget: 100_000,
            drift_limit: 1.0 / 550.0,
            pga: 0.10,
            drift_load_factor: 0.35,
        }
    }
}

impl SandboxConfig {
    pub fn with_pga(mut self, pga: f64) -> Self {
        self.pga = pga;
        self
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvFailureKind {
    BudgetExceeded,
    InterpreterInit,
    ParseRefused,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysMetrics {
    /// Fundamental period in seconds, present once `eigen` and `reportPeriod` ran.
    pub t_pred: Option<f64>,
    pub max_drift_ratio: Option<f64>,
    /// The program's own report lines, newline separated.
    pub compliance_text: String,
    pub eigen_ran: bool,
    /// Line of the last command executed (0 for an empty program).
    pub last_line: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ExecutionOutcome {
    EnvFailure {
        kind: EnvFailureKind,
        message: String,
    },
    RuntimeError {
        l_err: usize,
        command: String,
        message: String,
    },
    Success {
        metrics: PhysMetrics,
    },
}

impl ExecutionOutcome {
    pub fn is_success(&self) -> bool {
        matches!(self, ExecutionOutcome::Success { .. })
    }

    pub fn metrics(&self) -> Option<&PhysMetrics> {
        match self {
            ExecutionOutcome::Success { metrics } => Some(metrics),
            _ => None,
        }
    }

    pub fn t_pred(&self) -> Option<f64> {
        self.metrics().and_then(|m| m.t_pred)
    }
}
