use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{AlignError, Context};
use crate::building::BuildingSpec;
use crate::kernel::{empirical_period, EmpiricalPeriod};
use crate::templates::TemplateKind;

/// Reference labels per context in the shipped, deliberately noisy dataset.
pub const SHIPPED_LABEL_COUNTS: [(TemplateKind, usize); 7] = [
    (TemplateKind::Correct, 3),
    (TemplateKind::PeriodBiased, 6),
    (TemplateKind::FormatBroken, 3),
    (TemplateKind::TierMissing, 3),
    (TemplateKind::EigenBeforeMass, 2),
    (TemplateKind::UndefinedTag, 2),
    (TemplateKind::UnterminatedString, 1),
];

/// One line of a dataset file: the spec fields plus a reference template id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    #[serde(flatten)]
    pub spec: BuildingSpec,
    pub reference: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SftExample {
    pub spec: BuildingSpec,
    pub reference: TemplateKind,
    pub t_gt: f64,
}

impl SftExample {
    pub fn new(spec: BuildingSpec, reference: TemplateKind, coeffs: &EmpiricalPeriod) -> Result<Self, AlignError> {
        let t_gt = empirical_period(&spec, coeffs, true).map_err(|e| AlignError::Dataset {
            line: 0,
            message: e.to_string(),
        })?;
        Ok(Self { spec, reference, t_gt })
    }
}

/// `labels` examples for every context, specs drawn inside the context.
pub fn generate_dataset(
    seed: u64,
    labels: &[(TemplateKind, usize)],
    coeffs: &EmpiricalPeriod,
) -> Vec<SftExample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for ctx in Context::all() {
        for &(kind, count) in labels {
            for _ in 0..count {
                let spec = BuildingSpec::sample_where(&mut rng, |s| {
                    s.function == ctx.function && ctx.stories().contains(&s.stories)
                });
                out.push(SftExample::new(spec, kind, coeffs).expect("sampled specs are admissible"));
            }
        }
    }
    out
}

pub fn write_dataset(examples: &[SftExample]) -> String {
    let mut text = String::new();
    for ex in examples {
        let rec = DatasetRecord {
            spec: ex.spec.clone(),
            reference: ex.reference.id().to_string(),
        };
        text.push_str(&serde_json::to_string(&rec).expect("serializable"));
        text.push('\n');
    }
    text
}

pub fn load_dataset(text: &str, coeffs: &EmpiricalPeriod) -> Result<Vec<SftExample>, AlignError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let at = |message: String| AlignError::Dataset { line: i + 1, message };
        let rec: DatasetRecord = serde_json::from_str(line).map_err(|e| at(e.to_string()))?;
        let kind = TemplateKind::from_id(&rec.reference).ok_or_else(|| AlignError::UnknownReference(rec.reference.clone()))?;
        let t_gt = empirical_period(&rec.spec, coeffs, true).map_err(|e| at(e.to_string()))?;
        out.push(SftExample {
            spec: rec.spec,
            reference: kind,
            t_gt,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_counts_fill_each_context() {
        let total: usize = SHIPPED_LABEL_COUNTS.iter().map(|(_, n)| n).sum();
        assert_eq!(total, 20);
        let ds = generate_dataset(5, &SHIPPED_LABEL_COUNTS, &EmpiricalPeriod::default());
        assert_eq!(ds.len(), 20 * Context::COUNT);
        for ex in &ds {
            ex.spec.validate().unwrap();
        }
    }

    #[test]
    fn file_round_trip() {
        let coeffs = EmpiricalPeriod::default();
        let ds = generate_dataset(9, &[(TemplateKind::Correct, 1)], &coeffs);
        let text = write_dataset(&ds);
        assert_eq!(load_dataset(&text, &coeffs).unwrap(), ds);
        let bad = text.lines().next().unwrap().replace("\"correct\"", "\"mystery\"");
        assert_eq!(load_dataset(&bad, &coeffs).unwrap_err(), AlignError::UnknownReference("mystery".into()));
    }
}
