//! Dynamic-validation backends: a seeded simulation, recorded replay, and
//! an external-command adapter with pattern-specific harness generation.

mod external;
mod harness;
mod outcome;
mod recorded;
mod simulated;

pub use external::{ExternalBackend, OutcomeMarkers, FUZZ_CMD_ENV, GRACE_SECS, MAX_BUDGET_SECS, MIN_BUDGET_SECS};
pub use harness::{generate_harness, harness_bindings, HarnessBindings, HarnessError, HarnessTemplate, TemplateSet};
pub use outcome::{FuzzBackend, FuzzError, FuzzOutcome, FuzzOutcomeKind, FuzzRequest};
pub use recorded::{write_recorded, RecordedBackend, RecordedOutcome};
pub use simulated::{SimOracleConfig, SimulatedBackend};

/// Runs one validation through any backend.
pub fn run_fuzz(backend: &dyn FuzzBackend, request: &FuzzRequest<'_>, budget_secs: f64) -> Result<FuzzOutcome, FuzzError> {
    backend.run(request, budget_secs)
}
