use std::fmt;

use serde::{Deserialize, Serialize};

use crate::warning_store::{Label, WarningId, WarningRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FuzzOutcomeKind {
    Crash,
    SanitizerViolation,
    Clean,
    Inconclusive,
    InfrastructureFailure,
}

impl FuzzOutcomeKind {
    pub const ALL: [FuzzOutcomeKind; 5] = [
        FuzzOutcomeKind::Crash,
        FuzzOutcomeKind::SanitizerViolation,
        FuzzOutcomeKind::Clean,
        FuzzOutcomeKind::Inconclusive,
        FuzzOutcomeKind::InfrastructureFailure,
    ];

    /// Crash-grade evidence of a real bug.
    pub fn is_bug_evidence(self) -> bool {
        matches!(self, FuzzOutcomeKind::Crash | FuzzOutcomeKind::SanitizerViolation)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FuzzOutcomeKind::Crash => "crash",
            FuzzOutcomeKind::SanitizerViolation => "sanitizer_violation",
            FuzzOutcomeKind::Clean => "clean",
            FuzzOutcomeKind::Inconclusive => "inconclusive",
            FuzzOutcomeKind::InfrastructureFailure => "infrastructure_failure",
        }
    }
}

impl fmt::Display for FuzzOutcomeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Result of one dynamic-validation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzOutcome {
    pub kind: FuzzOutcomeKind,
    /// Wall time in seconds.
    pub elapsed: f64,
    /// Sanitizer class, signal, or failure reason.
    pub detail: String,
}

impl FuzzOutcome {
    pub fn new(kind: FuzzOutcomeKind, elapsed: f64, detail: impl Into<String>) -> Self {
        Self { kind, elapsed, detail: detail.into() }
    }

    pub fn infrastructure(detail: impl Into<String>) -> Self {
        Self::new(FuzzOutcomeKind::InfrastructureFailure, 0.0, detail)
    }
}

/// What a backend is asked to validate.
#[derive(Debug, Clone, Copy)]
pub struct FuzzRequest<'a> {
    pub id: WarningId,
    /// Ground truth, consulted only by the simulated backend.
    pub label: Option<Label>,
    /// The full warning, needed to generate a harness.
    pub record: Option<&'a WarningRecord>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FuzzError {
    #[error("no recorded outcome for warning(s) {}", .0.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(", "))]
    MissingRecording(Vec<WarningId>),
    #[error("simulated backend needs the ground-truth label of warning {0}")]
    MissingLabel(WarningId),
    #[error("invalid backend configuration: {0}")]
    Config(String),
}

/// A dynamic-validation backend. Implementations must be safe to call
/// concurrently for distinct warnings.
pub trait FuzzBackend: Send + Sync {
    fn run(&self, request: &FuzzRequest<'_>, budget_secs: f64) -> Result<FuzzOutcome, FuzzError>;
}
