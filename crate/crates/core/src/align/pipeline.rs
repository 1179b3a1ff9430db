use std::collections::HashMap;

use crate::building::BuildingSpec;
use crate::minidsl::ApiTiers;
use crate::reward::{score_output, RewardConfig};
use crate::sandbox::SandboxConfig;

/// Candidate text → scalar reward, memoized on `(text, T_gt, PGA)`.
#[derive(Debug, Clone, Default)]
pub struct RewardPipeline {
    pub reward: RewardConfig,
    pub tiers: ApiTiers,
    /// The PGA field is replaced by each query's own spec value.
    pub sandbox: SandboxConfig,
    cache: HashMap<(String, u64, u64), f64>,
}

impl RewardPipeline {
    pub fn new(reward: RewardConfig, tiers: ApiTiers, sandbox: SandboxConfig) -> Self {
        Self {
            reward,
            tiers,
            sandbox,
            cache: HashMap::new(),
        }
    }

    pub fn score(&mut self, raw: &str, spec: &BuildingSpec, t_gt: f64) -> f64 {
        let key = (raw.to_string(), t_gt.to_bits(), spec.pga.to_bits());
        if let Some(&r) = self.cache.get(&key) {
            return r;
        }
        let sandbox = self.sandbox.with_pga(spec.pga);
        let r = score_output(raw, t_gt, &self.reward, &self.tiers, &sandbox).breakdown.total;
        self.cache.insert(key, r);
        r
    }

    pub fn evaluations(&self) -> usize {
        self.cache.len()
    }
}
