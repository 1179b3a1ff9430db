//! Two-stage alignment of a categorical template policy: likelihood fitting
//! followed by group-relative policy optimization with a reference KL anchor.

mod dataset;
mod grpo;
mod pipeline;
mod policy;
mod run;
mod sft;

pub use dataset::{generate_dataset, load_dataset, write_dataset, DatasetRecord, SftExample, SHIPPED_LABEL_COUNTS};
pub use grpo::{compute_advantages, grpo_step, sample_group, GroupBatch, GroupSample, GroupStats};
pub use pipeline::RewardPipeline;
pub use policy::{categorical_kl, Context, ContextSummary, TemplatePolicy};
pub use run::{expected_reward, run_rla_spc, IterationLog, RunResult};
pub use sft::sft_fit;

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum AlignError {
    #[error("unknown reference template '{0}'")]
    UnknownReference(String),
    #[error("no policy context for {0}")]
    UnknownContext(String),
    #[error("importance ratio {ratio:e} exceeds the overflow guard")]
    NumericalOverflow { ratio: f64 },
    #[error("invalid align config: {0}")]
    InvalidConfig(String),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("dataset line {line}: {message}")]
    Dataset { line: usize, message: String },
}

/// Ratios above this signal a degenerate old-policy snapshot.
pub const RATIO_OVERFLOW: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlignConfig {
    /// Candidates sampled per query.
    pub group_size: usize,
    /// KL weight toward the frozen reference policy.
    pub beta: f64,
    /// Added to the group variance before the square root.
    pub epsilon_guard: f64,
    pub learning_rate: f64,
    pub iterations: usize,
    pub seed: u64,
    /// Queries drawn per context in each outer iteration.
    pub queries_per_context: usize,
    pub sft_learning_rate: f64,
    pub sft_max_steps: usize,
    /// Stage I stops once the mean NLL improves by less than this per step.
    pub sft_tolerance: f64,
}

impl Default for AlignConfig {
    fn default() -> Self {
        Self {
            group_size: 8,
            beta: 0.04,
            epsilon_guard: 1e-8,
            learning_rate: 0.1,
            iterations: 200,
            seed: 0,
            queries_per_context: 1,
            sft_learning_rate: 1.0,
            sft_max_steps: 10_000,
            sft_tolerance: 1e-6,
        }
    }
}

impl AlignConfig {
    pub fn validate(&self) -> Result<(), AlignError> {
        let bad = |m: &str| Err(AlignError::InvalidConfig(m.to_string()));
        if self.group_size < 2 {
            return bad("group_size must be at least 2");
        }
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return bad("beta must be finite and non-negative");
        }
        if !(self.epsilon_guard.is_finite() && self.epsilon_guard > 0.0) {
            return bad("epsilon_guard must be positive");
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad("learning_rate must be positive");
        }
        if !(self.sft_learning_rate.is_finite() && self.sft_learning_rate > 0.0) {
            return bad("sft_learning_rate must be positive");
        }
        if !(self.sft_tolerance.is_finite() && self.sft_tolerance >= 0.0) {
            return bad("sft_tolerance must be non-negative");
        }
        if self.queries_per_context == 0 {
            return bad("queries_per_context must be at least 1");
        }
        Ok(())
    }
}
