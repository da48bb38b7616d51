use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::outcome::{FuzzBackend, FuzzError, FuzzOutcome, FuzzOutcomeKind, FuzzRequest};
use crate::hash::derive_seed;
use crate::warning_store::{Label, WarningId};

/// Fidelity of the simulated fuzzing oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimOracleConfig {
    pub p_crash_given_tp: f64,
    pub p_crash_given_fp: f64,
    /// Probability of an inconclusive run given no crash.
    pub p_inconclusive: f64,
    pub seed: u64,
}

impl Default for SimOracleConfig {
    fn default() -> Self {
        Self { p_crash_given_tp: 0.6, p_crash_given_fp: 0.02, p_inconclusive: 0.25, seed: 0 }
    }
}

impl SimOracleConfig {
    pub fn validate(&self) -> Result<(), FuzzError> {
        for (name, p) in [
            ("p_crash_given_tp", self.p_crash_given_tp),
            ("p_crash_given_fp", self.p_crash_given_fp),
            ("p_inconclusive", self.p_inconclusive),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(FuzzError::Config(format!("{name} = {p} outside [0, 1]")));
            }
        }
        if self.p_crash_given_fp > self.p_crash_given_tp {
            return Err(FuzzError::Config("p_crash_given_fp must not exceed p_crash_given_tp".into()));
        }
        Ok(())
    }

    /// Probabilities of (crash, inconclusive, clean) for a label.
    pub fn outcome_probabilities(&self, label: Label) -> [f64; 3] {
        let crash = match label {
            Label::TruePositive => self.p_crash_given_tp,
            Label::FalsePositive => self.p_crash_given_fp,
        };
        let inconclusive = (1.0 - crash) * self.p_inconclusive;
        [crash, inconclusive, 1.0 - crash - inconclusive]
    }
}

/// Deterministic test double for dynamic validation. The outcome is a pure
/// function of (seed, warning id, label, config), independent of call order.
#[derive(Debug, Clone)]
pub struct SimulatedBackend {
    pub config: SimOracleConfig,
}

impl SimulatedBackend {
    pub fn new(config: SimOracleConfig) -> Result<Self, FuzzError> {
        config.validate()?;
        Ok(Self { config })
    }

    pub fn outcome_kind(&self, id: WarningId, label: Label) -> FuzzOutcomeKind {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.config.seed, &[id.0]));
        let p_crash = match label {
            Label::TruePositive => self.config.p_crash_given_tp,
            Label::FalsePositive => self.config.p_crash_given_fp,
        };
        let crash_draw: f64 = rng.random();
        if crash_draw < p_crash {
            return FuzzOutcomeKind::Crash;
        }
        let inconclusive_draw: f64 = rng.random();
        if inconclusive_draw < self.config.p_inconclusive {
            FuzzOutcomeKind::Inconclusive
        } else {
            FuzzOutcomeKind::Clean
        }
    }
}

impl FuzzBackend for SimulatedBackend {
    fn run(&self, request: &FuzzRequest<'_>, _budget_secs: f64) -> Result<FuzzOutcome, FuzzError> {
        let label = request.label.ok_or(FuzzError::MissingLabel(request.id))?;
        let kind = self.outcome_kind(request.id, label);
        Ok(FuzzOutcome::new(kind, 0.0, "simulated"))
    }
}
