//! Single-file harness configuration: one TOML table per component.

use serde::{Deserialize, Serialize};

use crate::align::{AlignConfig, AlignError};
use crate::bench::EvalConfig;
use crate::kernel::EmpiricalPeriod;
use crate::minidsl::{ApiTiers, TierError, TierLists};
use crate::reward::{RewardConfig, RewardConfigError};
use crate::sandbox::SandboxConfig;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config syntax: {0}")]
    Syntax(String),
    #[error(transparent)]
    Reward(#[from] RewardConfigError),
    #[error(transparent)]
    Tiers(#[from] TierError),
    #[error(transparent)]
    Align(#[from] AlignError),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarnessConfig {
    pub reward: RewardConfig,
    pub tiers: TierLists,
    pub sandbox: SandboxConfig,
    pub period: EmpiricalPeriod,
    pub align: AlignConfig,
    pub bench: EvalConfig,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        Self {
            reward: RewardConfig::default(),
            tiers: ApiTiers::default().to_lists(),
            sandbox: SandboxConfig::default(),
            period: EmpiricalPeriod::default(),
            align: AlignConfig::default(),
            bench: EvalConfig::default(),
        }
    }
}

impl HarnessConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: HarnessConfig = toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.reward.validate()?;
        ApiTiers::from_lists(&self.tiers)?;
        self.align.validate()?;
        if !(self.period.ct > 0.0 && self.period.exponent.is_finite()) {
            return Err(ConfigError::Invalid("period.ct must be positive".into()));
        }
        if self.sandbox.budget == 0 {
            return Err(ConfigError::Invalid("sandbox.budget must be at least 1".into()));
        }
        if !(self.bench.period_threshold >= 0.0) {
            return Err(ConfigError::Invalid("bench.period_threshold must be non-negative".into()));
        }
        Ok(())
    }

    pub fn api_tiers(&self) -> ApiTiers {
        ApiTiers::from_lists(&self.tiers).expect("validated")
    }

    /// Evaluation settings with the shared reward, tiers and sandbox filled in.
    pub fn eval_config(&self) -> EvalConfig {
        EvalConfig {
            reward: self.reward.clone(),
            tiers: self.api_tiers(),
            sandbox: self.sandbox,
            ..self.bench.clone()
        }
    }

    /// Stable JSON rendering used for hashing.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }
}
