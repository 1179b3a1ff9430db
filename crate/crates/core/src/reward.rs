//! Hybrid reward: format gate, tiered API coverage, and sandbox execution.

use serde::{Deserialize, Serialize};

use crate::minidsl::{self, ApiTiers, StaticReport};
use crate::sandbox::{self, ExecutionOutcome, SandboxConfig};

const WEIGHT_SUM_TOL: f64 = 1e-12;
/// Relative-error bounds are closed; this absorbs the representation error
/// of decimal boundaries such as `1.1 − 1.0`.
pub const EPSILON_SLACK: f64 = 1e-12;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum RewardConfigError {
    #[error("reward weights sum to {0}, expected 1")]
    WeightSum(f64),
    #[error("{0} must be finite and non-negative")]
    Negative(&'static str),
    #[error("phy_tiers: {0}")]
    Tiers(String),
    #[error("reward ordering violated: {0}")]
    Ordering(String),
    #[error("invalid reward config: {0}")]
    Format(String),
}

/// One row of the physics tier table. `max_epsilon = None` is the catch-all.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhyTier {
    #[serde(default)]
    pub max_epsilon: Option<f64>,
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardConfig {
    pub w_fmt: f64,
    pub w_ast: f64,
    pub w_exec: f64,
    pub alpha_tiers: [f64; 3],
    pub lambda_undef: f64,
    pub eta_env: f64,
    pub alpha_base: f64,
    pub beta_step: f64,
    pub phy_tiers: Vec<PhyTier>,
}

impl Default for RewardConfig {
    fn default() -> Self {
        let tier = |max_epsilon, reward| PhyTier { max_epsilon, reward };
        Self {
            w_fmt: 0.05,
            w_ast: 0.25,
            w_exec: 0.70,
            alpha_tiers: [0.4, 0.3, 0.3],
            lambda_undef: 0.1,
            eta_env: 0.05,
            alpha_base: 0.2,
            beta_step: 0.3,
            phy_tiers: vec![
                tier(Some(0.10), 1.0),
                tier(Some(0.20), 0.9),
                tier(Some(0.40), 0.8),
                tier(None, 0.7),
            ],
        }
    }
}

impl RewardConfig {
    pub fn from_toml(text: &str) -> Result<Self, RewardConfigError> {
        let cfg: RewardConfig = toml::from_str(text).map_err(|e| RewardConfigError::Format(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), RewardConfigError> {
        let non_negative = [
            ("w_fmt", self.w_fmt),
            ("w_ast", self.w_ast),
            ("w_exec", self.w_exec),
            ("alpha_tiers[1]", self.alpha_tiers[0]),
            ("alpha_tiers[2]", self.alpha_tiers[1]),
            ("alpha_tiers[3]", self.alpha_tiers[2]),
            ("lambda_undef", self.lambda_undef),
            ("eta_env", self.eta_env),
            ("alpha_base", self.alpha_base),
            ("beta_step", self.beta_step),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(RewardConfigError::Negative(name));
            }
        }
        let sum = self.w_fmt + self.w_ast + self.w_exec;
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(RewardConfigError::WeightSum(sum));
        }

        let tiers = &self.phy_tiers;
        let Some(last) = tiers.last() else {
            return Err(RewardConfigError::Tiers("table is empty".into()));
        };
        if last.max_epsilon.is_some() {
            return Err(RewardConfigError::Tiers("final tier must be the catch-all (no max_epsilon)".into()));
        }
        let mut prev_bound = f64::NEG_INFINITY;
        for t in &tiers[..tiers.len() - 1] {
            match t.max_epsilon {
                Some(b) if b.is_finite() && b > prev_bound && b >= 0.0 => prev_bound = b,
                Some(b) => return Err(RewardConfigError::Tiers(format!("bound {b} is not increasing"))),
                None => return Err(RewardConfigError::Tiers("only the final tier may omit max_epsilon".into())),
            }
        }
        for t in tiers {
            if !(0.0..=1.0).contains(&t.reward) {
                return Err(RewardConfigError::Tiers(format!("reward {} outside [0, 1]", t.reward)));
            }
        }
        if tiers.windows(2).any(|w| w[1].reward > w[0].reward) {
            return Err(RewardConfigError::Tiers("rewards must be non-increasing in epsilon".into()));
        }

        let floor = last.reward;
        if self.alpha_base + self.beta_step >= floor {
            return Err(RewardConfigError::Ordering(format!(
                "alpha_base + beta_step = {} must be below the lowest physics reward {floor}",
                self.alpha_base + self.beta_step
            )));
        }
        if self.eta_env >= self.alpha_base {
            return Err(RewardConfigError::Ordering(format!(
                "eta_env = {} must be below alpha_base = {}",
                self.eta_env, self.alpha_base
            )));
        }
        Ok(())
    }

    /// Physics reward for a relative period error.
    pub fn physics_reward(&self, epsilon: f64) -> (usize, f64) {
        for (i, t) in self.phy_tiers.iter().enumerate() {
            match t.max_epsilon {
                Some(b) if epsilon <= b + EPSILON_SLACK => return (i, t.reward),
                Some(_) => {}
                None => return (i, t.reward),
            }
        }
        let i = self.phy_tiers.len() - 1;
        (i, self.phy_tiers[i].reward)
    }
}

fn is_fence(line: &str) -> Option<&str> {
    line.trim().strip_prefix("```")
}

fn is_lang_tag(s: &str) -> bool {
    s.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '+' | '.'))
}

/// 1 if the output has exactly one fenced block (optionally tagged) and at
/// most one `<think>…</think>` pair that closes before the block opens.
pub fn format_reward(raw: &str) -> u8 {
    let mut fences = Vec::new();
    let mut offset = 0;
    for line in raw.split_inclusive('\n') {
        if let Some(rest) = is_fence(line) {
            fences.push((offset, rest.trim()));
        }
        offset += line.len();
    }
    let [(open_at, tag), (_, close_tag)] = fences[..] else {
        return 0;
    };
    if !is_lang_tag(tag) || !close_tag.is_empty() {
        return 0;
    }
    let opens: Vec<usize> = raw.match_indices("<think>").map(|(i, _)| i).collect();
    let closes: Vec<usize> = raw.match_indices("</think>").map(|(i, _)| i).collect();
    match (&opens[..], &closes[..]) {
        ([], []) => 1,
        ([o], [c]) if o < c && c + "</think>".len() <= open_at => 1,
        _ => 0,
    }
}

/// Program text inside the first fenced block; an unclosed fence runs to the
/// end. Without fences, the output minus any reasoning block.
pub fn extract_code(raw: &str) -> String {
    let mut lines = raw.split_inclusive('\n');
    let mut code = String::new();
    let mut found = false;
    for line in lines.by_ref() {
        if is_fence(line).is_some() {
            found = true;
            break;
        }
    }
    if found {
        for line in lines {
            if is_fence(line).is_some() {
                break;
            }
            code.push_str(line);
        }
        return code;
    }
    match (raw.find("<think>"), raw.find("</think>")) {
        (Some(o), Some(c)) if o < c => {
            let rest = &raw[c + "</think>".len()..];
            format!("{}{}", &raw[..o], rest.strip_prefix('\n').unwrap_or(rest))
        }
        _ => raw.to_string(),
    }
}

/// `clip(Σ α_k c_k − λ·N_undef, 0, 1)`.
pub fn ast_reward(report: &StaticReport, cfg: &RewardConfig) -> f64 {
    let a = &cfg.alpha_tiers;
    let c = &report.coverage;
    let raw = a[0] * c[0] + a[1] * c[1] + a[2] * c[2] - cfg.lambda_undef * report.undef_count as f64;
    raw.clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "branch", rename_all = "snake_case")]
pub enum ExecBranch {
    EnvFailure,
    RuntimeError {
        l_err: usize,
        l_tot: usize,
    },
    /// Executed cleanly but never reported a period; scored as progress.
    SuccessWithoutPeriod {
        last_line: usize,
        l_tot: usize,
    },
    Success {
        tier: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExecReward {
    pub r_exec: f64,
    pub epsilon: Option<f64>,
    pub branch: ExecBranch,
}

fn progress_reward(line: usize, l_tot: usize, cfg: &RewardConfig) -> f64 {
    if line == 0 || l_tot == 0 {
        return cfg.eta_env;
    }
    let frac = (line as f64 / l_tot as f64).min(1.0);
    cfg.alpha_base + cfg.beta_step * frac
}

pub fn exec_reward(outcome: &ExecutionOutcome, l_tot: usize, t_gt: f64, cfg: &RewardConfig) -> ExecReward {
    match outcome {
        ExecutionOutcome::EnvFailure { .. } => ExecReward {
            r_exec: cfg.eta_env,
            epsilon: None,
            branch: ExecBranch::EnvFailure,
        },
        ExecutionOutcome::RuntimeError { l_err, .. } => ExecReward {
            r_exec: progress_reward(*l_err, l_tot, cfg),
            epsilon: None,
            branch: ExecBranch::RuntimeError { l_err: *l_err, l_tot },
        },
        ExecutionOutcome::Success { metrics } => match metrics.t_pred {
            Some(t_pred) => {
                let epsilon = (t_pred - t_gt).abs() / t_gt;
                let (tier, r_exec) = cfg.physics_reward(epsilon);
                ExecReward {
                    r_exec,
                    epsilon: Some(epsilon),
                    branch: ExecBranch::Success { tier },
                }
            }
            None => ExecReward {
                r_exec: progress_reward(metrics.last_line, l_tot, cfg),
                epsilon: None,
                branch: ExecBranch::SuccessWithoutPeriod {
                    last_line: metrics.last_line,
                    l_tot,
                },
            },
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RewardBreakdown {
    pub r_fmt: u8,
    pub r_ast: f64,
    pub r_exec: f64,
    pub epsilon: Option<f64>,
    pub total: f64,
    pub coverage: [f64; 3],
    pub undef_count: usize,
    pub exec: ExecBranch,
}

pub fn mghr(
    raw: &str,
    report: &StaticReport,
    outcome: &ExecutionOutcome,
    l_tot: usize,
    t_gt: f64,
    cfg: &RewardConfig,
) -> RewardBreakdown {
    let r_fmt = format_reward(raw);
    let r_ast = ast_reward(report, cfg);
    let exec = exec_reward(outcome, l_tot, t_gt, cfg);
    RewardBreakdown {
        r_fmt,
        r_ast,
        r_exec: exec.r_exec,
        epsilon: exec.epsilon,
        total: cfg.w_fmt * r_fmt as f64 + cfg.w_ast * r_ast + cfg.w_exec * exec.r_exec,
        coverage: report.coverage,
        undef_count: report.undef_count,
        exec: exec.branch,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scored {
    pub breakdown: RewardBreakdown,
    pub outcome: ExecutionOutcome,
}

/// Full pipeline for one raw model output: extract, analyse, execute, score.
pub fn score_output(
    raw: &str,
    t_gt: f64,
    cfg: &RewardConfig,
    tiers: &ApiTiers,
    sandbox_cfg: &SandboxConfig,
) -> Scored {
    let code = extract_code(raw);
    let (program, _) = minidsl::parse_recovering(&code);
    let report = minidsl::static_report(&program, tiers);
    let outcome = sandbox::execute_source(&code, sandbox_cfg);
    let breakdown = mghr(raw, &report, &outcome, minidsl::count_lines(&code), t_gt, cfg);
    Scored { breakdown, outcome }
}
