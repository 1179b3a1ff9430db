use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::BenchError;
use crate::building::BuildingSpec;
use crate::kernel::{empirical_period, EmpiricalPeriod};

/// One line of a case file: the spec fields plus `id` and `t_gt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalCase {
    pub id: String,
    #[serde(flatten)]
    pub spec: BuildingSpec,
    /// Seconds.
    pub t_gt: f64,
}

pub fn case_id(i: usize) -> String {
    format!("case{i:03}")
}

pub fn generate_cases(count: usize, seed: u64, coeffs: &EmpiricalPeriod) -> Vec<EvalCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let spec = BuildingSpec::sample(&mut rng);
            let t_gt = empirical_period(&spec, coeffs, true).expect("sampled specs are admissible");
            EvalCase { id: case_id(i), spec, t_gt }
        })
        .collect()
}

pub fn write_cases(cases: &[EvalCase]) -> String {
    cases
        .iter()
        .map(|c| serde_json::to_string(c).expect("serializable") + "\n")
        .collect()
}

pub fn load_cases(text: &str) -> Result<Vec<EvalCase>, BenchError> {
    let mut out: Vec<EvalCase> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |message: String| BenchError::CaseFile { line: i + 1, message };
        let case: EvalCase = serde_json::from_str(line).map_err(|e| bad(e.to_string()))?;
        if !(case.t_gt.is_finite() && case.t_gt > 0.0) {
            return Err(bad(format!("t_gt = {} must be positive", case.t_gt)));
        }
        if out.iter().any(|c| c.id == case.id) {
            return Err(bad(format!("duplicate case id {}", case.id)));
        }
        out.push(case);
    }
    Ok(out)
}
