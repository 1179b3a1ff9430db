use super::{AlignConfig, AlignError, Context, SftExample, TemplatePolicy};

/// Label frequencies per context, `None` for contexts without examples.
fn frequencies(dataset: &[SftExample], policy: &TemplatePolicy) -> Result<Vec<Option<Vec<f64>>>, AlignError> {
    let mut counts = vec![vec![0usize; policy.templates.len()]; Context::COUNT];
    for ex in dataset {
        let c = Context::of(&ex.spec)?.index();
        let t = policy
            .template_index(ex.reference)
            .ok_or_else(|| AlignError::UnknownReference(ex.reference.id().to_string()))?;
        counts[c][t] += 1;
    }
    Ok(counts
        .into_iter()
        .map(|row| {
            let n: usize = row.iter().sum();
            (n > 0).then(|| row.iter().map(|&k| k as f64 / n as f64).collect())
        })
        .collect())
}

/// Mean negative log-likelihood per context, averaged over populated contexts.
fn nll(policy: &TemplatePolicy, freqs: &[Option<Vec<f64>>]) -> f64 {
    let mut total = 0.0;
    let mut populated = 0;
    for (c, f) in freqs.iter().enumerate() {
        if let Some(f) = f {
            let lp = policy.log_probs(c);
            total -= f.iter().zip(&lp).filter(|(fi, _)| **fi > 0.0).map(|(fi, l)| fi * l).sum::<f64>();
            populated += 1;
        }
    }
    if populated == 0 {
        0.0
    } else {
        total / populated as f64
    }
}

/// Gradient ascent on the per-context mean log-likelihood of the reference
/// labels. Stops when the NLL improves by less than the configured tolerance.
pub fn sft_fit(dataset: &[SftExample], policy: &TemplatePolicy, cfg: &AlignConfig) -> Result<TemplatePolicy, AlignError> {
    let freqs = frequencies(dataset, policy)?;
    let mut theta = policy.clone();
    if freqs.iter().all(Option::is_none) {
        return Ok(theta);
    }
    let mut current = nll(&theta, &freqs);
    for _ in 0..cfg.sft_max_steps {
        let mut next = theta.clone();
        for (c, f) in freqs.iter().enumerate() {
            let Some(f) = f else { continue };
            let p = theta.probs(c);
            for (j, z) in next.logits[c].iter_mut().enumerate() {
                *z += cfg.sft_learning_rate * (f[j] - p[j]);
            }
        }
        let value = nll(&next, &freqs);
        let improvement = current - value;
        theta = next;
        current = value;
        if improvement < cfg.sft_tolerance {
            break;
        }
    }
    Ok(theta)
}
