//! Benchmark cases, candidate evaluation, pass@k metrics, and the failure
//! taxonomy.

mod cases;
mod compliance;
mod evaluate;
mod passk;
mod taxonomy;

pub use cases::{case_id, generate_cases, load_cases, write_cases, EvalCase};
pub use compliance::{check_compliance, tokenize, AFFIRMATIVES, NEGATION_WINDOW, NEGATORS};
pub use evaluate::{
    check_period, evaluate, evaluate_candidate, load_candidates, Candidate, CandidateRecord, CaseCounts, EvalConfig,
    EvalReport, Metric, MetricValue, MetricsReport,
};
pub use passk::{pass_at_k, pass_at_k_exact, PassAtKError};
pub use taxonomy::{classify_failure, Classification, FailureLabel, TaxonomyHistogram, MODAL_SETUP_TAG};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum BenchError {
    #[error("case {case}: expected {expected} candidates, found {found}")]
    CardinalityMismatch { case: String, expected: usize, found: usize },
    #[error("no candidates to evaluate")]
    ZeroCandidates,
    #[error("candidate for unknown case '{0}'")]
    UnknownCase(String),
    #[error("k list must be non-empty with every k ≥ 1")]
    InvalidK,
    #[error("case file line {line}: {message}")]
    CaseFile { line: usize, message: String },
    #[error("candidate set: {0}")]
    CandidateSet(String),
    #[error("no period prediction")]
    MissingPrediction,
}
