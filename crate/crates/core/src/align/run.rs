use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{
    categorical_kl, grpo_step, sample_group, sft_fit, AlignConfig, AlignError, Context, RewardPipeline, SftExample,
    TemplatePolicy,
};
use crate::templates::render_output;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationLog {
    pub iteration: usize,
    pub expected_reward: f64,
    /// KL to the reference, averaged over contexts present in the dataset.
    pub mean_kl: f64,
    /// `(context id, argmax template id)` for every context.
    pub argmax: Vec<(String, String)>,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub reference: TemplatePolicy,
    pub final_policy: TemplatePolicy,
    pub log: Vec<IterationLog>,
    /// Mean reward of each template per context over the dataset specs.
    pub reward_table: Vec<Option<Vec<f64>>>,
}

impl RunResult {
    pub fn log_jsonl(&self) -> String {
        self.log
            .iter()
            .map(|r| serde_json::to_string(r).expect("serializable") + "\n")
            .collect()
    }

    pub fn gain(&self) -> f64 {
        self.log.last().expect("non-empty").expected_reward - self.log[0].expected_reward
    }
}

fn by_context(dataset: &[SftExample]) -> Result<Vec<Vec<&SftExample>>, AlignError> {
    let mut groups = vec![Vec::new(); Context::COUNT];
    for ex in dataset {
        groups[Context::of(&ex.spec)?.index()].push(ex);
    }
    Ok(groups)
}

fn reward_table(
    policy: &TemplatePolicy,
    groups: &[Vec<&SftExample>],
    pipeline: &mut RewardPipeline,
) -> Vec<Option<Vec<f64>>> {
    groups
        .iter()
        .map(|exs| {
            if exs.is_empty() {
                return None;
            }
            let row = policy
                .templates
                .iter()
                .map(|&kind| {
                    let total: f64 = exs
                        .iter()
                        .map(|ex| pipeline.score(&render_output(kind, &ex.spec, ex.t_gt, 0), &ex.spec, ex.t_gt))
                        .sum();
                    total / exs.len() as f64
                })
                .collect();
            Some(row)
        })
        .collect()
}

/// Exact expected reward under `policy`, averaged over populated contexts.
pub fn expected_reward(policy: &TemplatePolicy, table: &[Option<Vec<f64>>]) -> f64 {
    let mut sum = 0.0;
    let mut n = 0;
    for (c, row) in table.iter().enumerate() {
        if let Some(row) = row {
            sum += policy.probs(c).iter().zip(row).map(|(p, r)| p * r).sum::<f64>();
            n += 1;
        }
    }
    sum / n as f64
}

fn log_entry(
    iteration: usize,
    policy: &TemplatePolicy,
    reference: &TemplatePolicy,
    table: &[Option<Vec<f64>>],
) -> IterationLog {
    let populated: Vec<usize> = (0..Context::COUNT).filter(|&c| table[c].is_some()).collect();
    let mean_kl = populated
        .iter()
        .map(|&c| categorical_kl(&policy.log_probs(c), &reference.log_probs(c)))
        .sum::<f64>()
        / populated.len() as f64;
    IterationLog {
        iteration,
        expected_reward: expected_reward(policy, table),
        mean_kl,
        argmax: Context::all()
            .into_iter()
            .map(|c| (c.id(), policy.argmax(c.index()).id().to_string()))
            .collect(),
    }
}

/// Stage I likelihood fit, frozen as the reference, then Stage II group
/// updates: each outer iteration snapshots `θ_old`, and for every query
/// samples a group from the snapshot, scores it, and takes one ascent step.
pub fn run_rla_spc(
    dataset: &[SftExample],
    initial: &TemplatePolicy,
    cfg: &AlignConfig,
    pipeline: &mut RewardPipeline,
) -> Result<RunResult, AlignError> {
    cfg.validate()?;
    if dataset.is_empty() {
        return Err(AlignError::EmptyDataset);
    }
    let groups = by_context(dataset)?;
    let reference = sft_fit(dataset, initial, cfg)?;
    let table = reward_table(&reference, &groups, pipeline);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut theta = reference.clone();
    let mut log = vec![log_entry(0, &theta, &reference, &table)];
    for iteration in 1..=cfg.iterations {
        let old = theta.clone();
        for exs in groups.iter().filter(|g| !g.is_empty()) {
            for _ in 0..cfg.queries_per_context {
                let ex = exs[rng.gen_range(0..exs.len())];
                let mut batch = sample_group(&old, &ex.spec, ex.t_gt, cfg.group_size, &mut rng)?;
                let rewards = batch
                    .samples
                    .iter()
                    .map(|s| pipeline.score(&s.output, &ex.spec, ex.t_gt))
                    .collect();
                batch.set_rewards(rewards, cfg.epsilon_guard);
                theta = grpo_step(&theta, &reference, std::slice::from_ref(&batch), cfg)?;
            }
        }
        log.push(log_entry(iteration, &theta, &reference, &table));
    }
    Ok(RunResult {
        reference,
        final_policy: theta,
        log,
        reward_table: table,
    })
}
