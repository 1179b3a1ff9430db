use std::collections::BTreeMap;

use serde::{Serialize, Serializer};

use super::CandidateRecord;
use crate::sandbox::{EnvFailureKind, ExecutionOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FailureLabel {
    ExecParse,
    ExecRuntime,
    ExecBudget,
    PeriodMissingPrediction,
    PeriodModalSetup,
    PeriodOutOfTolerance,
    ComplianceDrift,
    ComplianceNoVerdict,
}

impl FailureLabel {
    pub const ALL: [FailureLabel; 8] = [
        FailureLabel::ExecParse,
        FailureLabel::ExecRuntime,
        FailureLabel::ExecBudget,
        FailureLabel::PeriodMissingPrediction,
        FailureLabel::PeriodModalSetup,
        FailureLabel::PeriodOutOfTolerance,
        FailureLabel::ComplianceDrift,
        FailureLabel::ComplianceNoVerdict,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FailureLabel::ExecParse => "executability/parse",
            FailureLabel::ExecRuntime => "executability/runtime",
            FailureLabel::ExecBudget => "executability/budget",
            FailureLabel::PeriodMissingPrediction => "period/missing_prediction",
            FailureLabel::PeriodModalSetup => "period/modal_setup",
            FailureLabel::PeriodOutOfTolerance => "period/out_of_tolerance",
            FailureLabel::ComplianceDrift => "compliance/drift",
            FailureLabel::ComplianceNoVerdict => "compliance/no_verdict",
        }
    }
}

impl Serialize for FailureLabel {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

/// Secondary tag for runtime errors raised by the modal-analysis commands.
pub const MODAL_SETUP_TAG: &str = "modal_setup";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub label: FailureLabel,
    pub secondary: Option<&'static str>,
}

/// First failing gate wins: executability, then period, then compliance.
/// Returns `None` for a strictly passing record.
pub fn classify_failure(record: &CandidateRecord) -> Option<Classification> {
    let plain = |label| Some(Classification { label, secondary: None });
    match &record.outcome {
        ExecutionOutcome::EnvFailure { kind, .. } => plain(match kind {
            EnvFailureKind::ParseRefused => FailureLabel::ExecParse,
            EnvFailureKind::BudgetExceeded => FailureLabel::ExecBudget,
            EnvFailureKind::InterpreterInit => FailureLabel::ExecRuntime,
        }),
        ExecutionOutcome::RuntimeError { command, .. } => Some(Classification {
            label: FailureLabel::ExecRuntime,
            secondary: matches!(command.as_str(), "eigen" | "reportPeriod").then_some(MODAL_SETUP_TAG),
        }),
        ExecutionOutcome::Success { metrics } => {
            if !record.passed_period {
                return plain(match metrics.t_pred {
                    None if metrics.eigen_ran => FailureLabel::PeriodMissingPrediction,
                    None => FailureLabel::PeriodModalSetup,
                    Some(_) => FailureLabel::PeriodOutOfTolerance,
                });
            }
            if !record.passed_compliance {
                return plain(if metrics.compliance_text.contains("drift check: fail") {
                    FailureLabel::ComplianceDrift
                } else {
                    FailureLabel::ComplianceNoVerdict
                });
            }
            None
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TaxonomyHistogram {
    pub failures: usize,
    /// Every label is present, zero counts included.
    pub primary: BTreeMap<&'static str, usize>,
    pub secondary: BTreeMap<&'static str, usize>,
}

impl TaxonomyHistogram {
    pub fn from_records<'a>(records: impl IntoIterator<Item = &'a CandidateRecord>) -> Self {
        let mut h = TaxonomyHistogram {
            primary: FailureLabel::ALL.iter().map(|l| (l.as_str(), 0)).collect(),
            secondary: [(MODAL_SETUP_TAG, 0)].into_iter().collect(),
            ..Default::default()
        };
        for r in records {
            if let Some(c) = &r.failure {
                h.failures += 1;
                *h.primary.get_mut(c.label.as_str()).expect("all labels seeded") += 1;
                if let Some(tag) = c.secondary {
                    *h.secondary.entry(tag).or_default() += 1;
                }
            }
        }
        h
    }
}
