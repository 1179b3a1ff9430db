use serde::{Serialize, Serializer};

use super::AlignError;
use crate::building::{BuildingFunction, BuildingSpec, STORIES_MAX, STORIES_MIN};
use crate::templates::TemplateKind;

/// Highest story count of the low bucket.
const LOW_BUCKET_MAX: u32 = 5;

/// Discretized spec signature: building function × story-count bucket.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Context {
    pub function: BuildingFunction,
    pub tall: bool,
}

impl Context {
    pub const COUNT: usize = 12;

    pub fn all() -> Vec<Context> {
        BuildingFunction::ALL
            .into_iter()
            .flat_map(|function| [false, true].map(|tall| Context { function, tall }))
            .collect()
    }

    pub fn of(spec: &BuildingSpec) -> Result<Context, AlignError> {
        if !(STORIES_MIN..=STORIES_MAX).contains(&spec.stories) {
            return Err(AlignError::UnknownContext(format!("{} stories", spec.stories)));
        }
        Ok(Context {
            function: spec.function,
            tall: spec.stories > LOW_BUCKET_MAX,
        })
    }

    pub fn index(self) -> usize {
        let f = BuildingFunction::ALL.iter().position(|&f| f == self.function).expect("listed");
        2 * f + usize::from(self.tall)
    }

    pub fn stories(self) -> std::ops::RangeInclusive<u32> {
        if self.tall {
            LOW_BUCKET_MAX + 1..=STORIES_MAX
        } else {
            STORIES_MIN..=LOW_BUCKET_MAX
        }
    }

    pub fn id(self) -> String {
        let bucket = if self.tall { "6-7" } else { "3-5" };
        format!("{}/{bucket}", self.function.name().to_lowercase())
    }
}

impl Serialize for Context {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.id())
    }
}

/// Softmax over per-context logits.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TemplatePolicy {
    pub templates: Vec<TemplateKind>,
    /// `logits[context][template]`.
    pub logits: Vec<Vec<f64>>,
}

impl TemplatePolicy {
    pub fn uniform(templates: &[TemplateKind]) -> Self {
        Self {
            templates: templates.to_vec(),
            logits: vec![vec![0.0; templates.len()]; Context::COUNT],
        }
    }

    pub fn template_index(&self, kind: TemplateKind) -> Option<usize> {
        self.templates.iter().position(|&t| t == kind)
    }

    pub fn log_probs(&self, ctx: usize) -> Vec<f64> {
        let z = &self.logits[ctx];
        let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + z.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        z.iter().map(|v| v - lse).collect()
    }

    pub fn probs(&self, ctx: usize) -> Vec<f64> {
        self.log_probs(ctx).into_iter().map(f64::exp).collect()
    }

    pub fn argmax(&self, ctx: usize) -> TemplateKind {
        let z = &self.logits[ctx];
        let mut best = 0;
        for (i, v) in z.iter().enumerate() {
            if *v > z[best] {
                best = i;
            }
        }
        self.templates[best]
    }

    /// Per-context probabilities keyed by template id, for reports.
    pub fn summary(&self) -> Vec<ContextSummary> {
        Context::all()
            .into_iter()
            .map(|c| ContextSummary {
                context: c,
                argmax: self.argmax(c.index()),
                probabilities: self
                    .templates
                    .iter()
                    .zip(self.probs(c.index()))
                    .map(|(t, p)| (t.id().to_string(), p))
                    .collect(),
            })
            .collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ContextSummary {
    pub context: Context,
    pub argmax: TemplateKind,
    pub probabilities: Vec<(String, f64)>,
}

/// `KL(p ‖ q)` between categoricals given as log-probabilities.
pub fn categorical_kl(log_p: &[f64], log_q: &[f64]) -> f64 {
    log_p
        .iter()
        .zip(log_q)
        .map(|(lp, lq)| {
            let p = lp.exp();
            if p == 0.0 {
                0.0
            } else {
                p * (lp - lq)
            }
        })
        .sum()
}
