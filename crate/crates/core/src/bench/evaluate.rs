use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_compliance, classify_failure, pass_at_k, BenchError, Classification, EvalCase, TaxonomyHistogram};
use crate::minidsl::{self, ApiTiers};
use crate::reward::{mghr, RewardBreakdown, RewardConfig, EPSILON_SLACK};
use crate::sandbox::{self, ExecutionOutcome, SandboxConfig};

/// Relative period error accepted by the period criterion.
pub const DEFAULT_PERIOD_THRESHOLD: f64 = 0.30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub period_threshold: f64,
    pub n: usize,
    pub ks: Vec<u64>,
    #[serde(skip)]
    pub reward: RewardConfig,
    #[serde(skip)]
    pub tiers: ApiTiers,
    #[serde(skip)]
    pub sandbox: SandboxConfig,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            period_threshold: DEFAULT_PERIOD_THRESHOLD,
            n: 5,
            ks: vec![1, 5],
            reward: RewardConfig::default(),
            tiers: ApiTiers::default(),
            sandbox: SandboxConfig::default(),
        }
    }
}

/// `|T_pred − T_gt| / T_gt ≤ threshold`, closed up to [`EPSILON_SLACK`].
pub fn check_period(t_pred: Option<f64>, t_gt: f64, threshold: f64) -> Result<bool, BenchError> {
    let t = t_pred.ok_or(BenchError::MissingPrediction)?;
    Ok((t - t_gt).abs() / t_gt <= threshold + EPSILON_SLACK)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub index: usize,
    /// Program text that is executed.
    pub source: String,
    /// Raw model output the program came from, used for the format gate.
    pub raw_output: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateRecord {
    pub case_id: String,
    pub index: usize,
    pub outcome: ExecutionOutcome,
    pub breakdown: RewardBreakdown,
    pub passed_exec: bool,
    pub passed_period: bool,
    pub passed_compliance: bool,
    pub passed_strict: bool,
    pub failure: Option<Classification>,
}

pub fn evaluate_candidate(case: &EvalCase, cand: &Candidate, cfg: &EvalConfig) -> CandidateRecord {
    let (program, _) = minidsl::parse_recovering(&cand.source);
    let report = minidsl::static_report(&program, &cfg.tiers);
    let outcome = sandbox::execute_source(&cand.source, &cfg.sandbox.with_pga(case.spec.pga));
    let raw = cand.raw_output.as_deref().unwrap_or(&cand.source);
    let breakdown = mghr(raw, &report, &outcome, minidsl::count_lines(&cand.source), case.t_gt, &cfg.reward);

    let passed_exec = outcome.is_success();
    let passed_period = passed_exec && check_period(outcome.t_pred(), case.t_gt, cfg.period_threshold).unwrap_or(false);
    let passed_compliance = passed_exec && outcome.metrics().is_some_and(|m| check_compliance(&m.compliance_text));
    let mut record = CandidateRecord {
        case_id: case.id.clone(),
        index: cand.index,
        outcome,
        breakdown,
        passed_exec,
        passed_period,
        passed_compliance,
        passed_strict: passed_exec && passed_period && passed_compliance,
        failure: None,
    };
    record.failure = classify_failure(&record);
    record
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Exec,
    Period,
    Compliance,
    Strict,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Exec, Metric::Period, Metric::Compliance, Metric::Strict];

    pub fn column(self, k: u64) -> String {
        match self {
            Metric::Exec => format!("Pass@{k}"),
            Metric::Period => format!("Pass@{k}_period"),
            Metric::Compliance => format!("Pass@{k}_compliance"),
            Metric::Strict => format!("Pass@{k}_strict"),
        }
    }

    fn passed(self, r: &CandidateRecord) -> bool {
        match self {
            Metric::Exec => r.passed_exec,
            Metric::Period => r.passed_period,
            Metric::Compliance => r.passed_compliance,
            Metric::Strict => r.passed_strict,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseCounts {
    pub case_id: String,
    pub n: u64,
    pub c_exec: u64,
    pub c_period: u64,
    pub c_compliance: u64,
    pub c_strict: u64,
}

impl CaseCounts {
    pub fn count(&self, m: Metric) -> u64 {
        match m {
            Metric::Exec => self.c_exec,
            Metric::Period => self.c_period,
            Metric::Compliance => self.c_compliance,
            Metric::Strict => self.c_strict,
        }
    }

    pub fn from_records(case_id: &str, records: &[CandidateRecord]) -> Self {
        let c = |m: Metric| records.iter().filter(|r| m.passed(r)).count() as u64;
        Self {
            case_id: case_id.to_string(),
            n: records.len() as u64,
            c_exec: c(Metric::Exec),
            c_period: c(Metric::Period),
            c_compliance: c(Metric::Compliance),
            c_strict: c(Metric::Strict),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricValue {
    pub metric: Metric,
    pub k: u64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub n: usize,
    pub ks: Vec<u64>,
    pub period_threshold: f64,
    /// Per-case pass@k, macro-averaged over cases.
    pub pass_at_k: Vec<MetricValue>,
    pub cases: Vec<CaseCounts>,
    pub taxonomy: TaxonomyHistogram,
}

impl MetricsReport {
    pub fn from_counts(cases: Vec<CaseCounts>, ks: &[u64], period_threshold: f64, taxonomy: TaxonomyHistogram) -> Self {
        let n = cases.first().map_or(0, |c| c.n as usize);
        let mut values = Vec::new();
        for &k in ks {
            for m in Metric::ALL {
                let sum: f64 = cases
                    .iter()
                    .map(|c| pass_at_k(c.n, c.count(m), k).expect("c ≤ n by construction"))
                    .sum();
                values.push(MetricValue {
                    metric: m,
                    k,
                    value: sum / cases.len() as f64,
                });
            }
        }
        Self {
            n,
            ks: ks.to_vec(),
            period_threshold,
            pass_at_k: values,
            cases,
            taxonomy,
        }
    }

    pub fn get(&self, metric: Metric, k: u64) -> Option<f64> {
        self.pass_at_k.iter().find(|v| v.metric == metric && v.k == k).map(|v| v.value)
    }

    /// Flat table in percent: pass@k for every k, the three derived metrics
    /// at the largest k, their mean, and the mean of all preceding columns.
    pub fn to_csv(&self, label: &str) -> String {
        let kmax = *self.ks.iter().max().expect("non-empty k list");
        let mut header = vec!["Model".to_string()];
        let mut row = vec![label.to_string()];
        let mut cols = Vec::new();
        for &k in &self.ks {
            header.push(Metric::Exec.column(k));
            cols.push(self.get(Metric::Exec, k).expect("computed"));
        }
        let derived: Vec<f64> = [Metric::Period, Metric::Compliance, Metric::Strict]
            .into_iter()
            .map(|m| {
                header.push(m.column(kmax));
                self.get(m, kmax).expect("computed")
            })
            .collect();
        cols.extend(&derived);
        let average = derived.iter().sum::<f64>() / 3.0;
        cols.push(average);
        header.push("Average".into());
        let overall = cols.iter().sum::<f64>() / cols.len() as f64;
        cols.push(overall);
        header.push("Overall Average".into());
        row.extend(cols.iter().map(|v| format!("{:.2}", 100.0 * v)));
        format!("{}\n{}\n", header.join(","), row.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub metrics: MetricsReport,
    pub records: Vec<CandidateRecord>,
}

/// Runs every candidate through parse → sandbox → scoring and aggregates
/// pass@k per case, then across cases. Cases evaluate in parallel; the
/// result is independent of evaluation order.
pub fn evaluate(
    cases: &[EvalCase],
    candidates: &BTreeMap<String, Vec<Candidate>>,
    cfg: &EvalConfig,
) -> Result<EvalReport, BenchError> {
    if cfg.ks.is_empty() || cfg.ks.contains(&0) {
        return Err(BenchError::InvalidK);
    }
    if cfg.n == 0 || cases.is_empty() {
        return Err(BenchError::ZeroCandidates);
    }
    for id in candidates.keys() {
        if !cases.iter().any(|c| &c.id == id) {
            return Err(BenchError::UnknownCase(id.clone()));
        }
    }
    for case in cases {
        let found = candidates.get(&case.id).map_or(0, Vec::len);
        if found != cfg.n {
            return Err(BenchError::CardinalityMismatch {
                case: case.id.clone(),
                expected: cfg.n,
                found,
            });
        }
    }
    let per_case: Vec<Vec<CandidateRecord>> = cases
        .par_iter()
        .map(|case| {
            candidates[&case.id]
                .iter()
                .map(|cand| evaluate_candidate(case, cand, cfg))
                .collect()
        })
        .collect();
    let counts = cases
        .iter()
        .zip(&per_case)
        .map(|(case, recs)| CaseCounts::from_records(&case.id, recs))
        .collect();
    let records: Vec<CandidateRecord> = per_case.into_iter().flatten().collect();
    let taxonomy = TaxonomyHistogram::from_records(&records);
    Ok(EvalReport {
        metrics: MetricsReport::from_counts(counts, &cfg.ks, cfg.period_threshold, taxonomy),
        records,
    })
}

/// Reads `<case_id>_<index>.mos` files with optional sibling `.out` files.
pub fn load_candidates(dir: &Path) -> Result<BTreeMap<String, Vec<Candidate>>, BenchError> {
    let io = |e: std::io::Error| BenchError::CandidateSet(format!("{}: {e}", dir.display()));
    let mut out: BTreeMap<String, Vec<Candidate>> = BTreeMap::new();
    let mut entries: Vec<_> = std::fs::read_dir(dir).map_err(io)?.collect::<Result<_, _>>().map_err(io)?;
    entries.sort_by_key(|e| e.file_name());
    for entry in entries {
        let path = entry.path();
        if path.extension().and_then(|e| e.to_str()) != Some("mos") {
            continue;
        }
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
        let Some((case, idx)) = stem.rsplit_once('_') else {
            return Err(BenchError::CandidateSet(format!("{stem}.mos is not named <case_id>_<index>.mos")));
        };
        let index: usize = idx
            .parse()
            .map_err(|_| BenchError::CandidateSet(format!("{stem}.mos: index '{idx}' is not an integer")))?;
        let source = std::fs::read_to_string(&path).map_err(io)?;
        let out_path = path.with_extension("out");
        let raw_output = if out_path.exists() {
            Some(std::fs::read_to_string(&out_path).map_err(io)?)
        } else {
            None
        };
        out.entry(case.to_string()).or_default().push(Candidate { index, source, raw_output });
    }
    for (case, list) in &mut out {
        list.sort_by_key(|c| c.index);
        if list.windows(2).any(|w| w[0].index == w[1].index) {
            return Err(BenchError::CandidateSet(format!("{case}: duplicate candidate index")));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{generate_cases, FailureLabel};
    use crate::kernel::EmpiricalPeriod;
    use crate::reward::extract_code;
    use crate::templates::{render_output, TemplateKind};

    fn candidates_for(cases: &[EvalCase], kinds: &[TemplateKind]) -> BTreeMap<String, Vec<Candidate>> {
        cases
            .iter()
            .map(|c| {
                let list = kinds
                    .iter()
                    .enumerate()
                    .map(|(i, &k)| {
                        let raw = render_output(k, &c.spec, c.t_gt, i as u64);
                        Candidate {
                            index: i,
                            source: extract_code(&raw),
                            raw_output: Some(raw),
                        }
                    })
                    .collect();
                (c.id.clone(), list)
            })
            .collect()
    }

    #[test]
    fn period_criterion() {
        assert!(check_period(Some(1.3), 1.0, 0.30).unwrap());
        assert!(check_period(Some(1.0), 1.0, 0.30).unwrap());
        assert!(!check_period(Some(2.0), 1.0, 0.30).unwrap());
        assert_eq!(check_period(None, 1.0, 0.30), Err(BenchError::MissingPrediction));
    }

    #[test]
    fn all_correct_scores_one() {
        let cases = generate_cases(3, 2, &EmpiricalPeriod::default());
        let cands = candidates_for(&cases, &[TemplateKind::Correct; 5]);
        let r = evaluate(&cases, &cands, &EvalConfig::default()).unwrap();
        assert!(r.metrics.pass_at_k.iter().all(|v| v.value == 1.0), "{:?}", r.metrics.pass_at_k);
        assert_eq!(r.metrics.taxonomy.failures, 0);
    }

    #[test]
    fn all_unparseable_scores_zero() {
        let cases = generate_cases(2, 2, &EmpiricalPeriod::default());
        let cands = candidates_for(&cases, &[TemplateKind::UnterminatedString; 5]);
        let r = evaluate(&cases, &cands, &EvalConfig::default()).unwrap();
        assert!(r.metrics.pass_at_k.iter().all(|v| v.value == 0.0));
        assert_eq!(r.metrics.taxonomy.primary[FailureLabel::ExecParse.as_str()], 10);
    }

    #[test]
    fn mixed_set_gives_two_fifths_strict() {
        let cases = generate_cases(4, 3, &EmpiricalPeriod::default());
        let kinds = [
            TemplateKind::Correct,
            TemplateKind::PeriodBiased,
            TemplateKind::Correct,
            TemplateKind::TierMissing,
            TemplateKind::EigenBeforeMass,
        ];
        let r = evaluate(&cases, &candidates_for(&cases, &kinds), &EvalConfig::default()).unwrap();
        assert!((r.metrics.get(Metric::Strict, 1).unwrap() - 0.4).abs() < 1e-15);
        assert!((r.metrics.get(Metric::Exec, 1).unwrap() - 0.8).abs() < 1e-15);
        let csv = r.metrics.to_csv("fixture");
        assert!(csv.starts_with("Model,Pass@1,Pass@5,Pass@5_period,Pass@5_compliance,Pass@5_strict,Average,Overall Average\n"));
    }

    #[test]
    fn cardinality_is_enforced() {
        let cases = generate_cases(2, 2, &EmpiricalPeriod::default());
        let cands = candidates_for(&cases, &[TemplateKind::Correct; 4]);
        assert!(matches!(
            evaluate(&cases, &cands, &EvalConfig::default()),
            Err(BenchError::CardinalityMismatch { found: 4, .. })
        ));
    }
}
