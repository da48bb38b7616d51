//! The triage MDP: a warning's state, the three actions, two-step episode
//! dynamics and the reward function.

use serde::{Deserialize, Serialize};

use crate::fuzz_backend::{FuzzBackend, FuzzOutcome, FuzzOutcomeKind, FuzzRequest};
use crate::warning_store::{Label, WarningId, WarningRecord};

/// Number of fuzz-outcome slots appended to the features.
pub const FUZZ_SLOTS: usize = 6;
/// Budget passed to the backend when none is configured.
pub const DEFAULT_FUZZ_BUDGET_SECS: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TriageAction {
    ClassifyTp,
    ClassifyFp,
    Fuzz,
}

impl TriageAction {
    /// Fixed order; also the greedy tie-break order.
    pub const ALL: [TriageAction; 3] = [TriageAction::ClassifyTp, TriageAction::ClassifyFp, TriageAction::Fuzz];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn prediction(self) -> Option<Label> {
        match self {
            TriageAction::ClassifyTp => Some(Label::TruePositive),
            TriageAction::ClassifyFp => Some(Label::FalsePositive),
            TriageAction::Fuzz => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TriageAction::ClassifyTp => "classify_tp",
            TriageAction::ClassifyFp => "classify_fp",
            TriageAction::Fuzz => "fuzz",
        }
    }
}

/// Slot of the fuzz one-hot: 0 is "not run", then the outcome kinds in
/// declaration order.
pub fn fuzz_slot(outcome: Option<FuzzOutcomeKind>) -> usize {
    match outcome {
        None => 0,
        Some(kind) => 1 + FuzzOutcomeKind::ALL.iter().position(|k| *k == kind).expect("kind listed in ALL"),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RewardSpec {
    pub correct: f64,
    pub incorrect: f64,
    pub fuzz_cost: f64,
    pub bonus_crash_tp: f64,
    pub bonus_clean_fp: f64,
    pub bonus_inconclusive: f64,
    pub gamma: f64,
}

impl Default for RewardSpec {
    fn default() -> Self {
        Self {
            correct: 15.0,
            incorrect: -15.0,
            fuzz_cost: -5.0,
            bonus_crash_tp: 10.0,
            bonus_clean_fp: 8.0,
            bonus_inconclusive: 3.0,
            gamma: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EnvError {
    #[error("state has {found} feature values, manifest has {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("illegal action {action:?}: {reason}")]
    IllegalAction { action: TriageAction, reason: &'static str },
}

/// Per-warning MDP state: normalized features plus the fuzz outcome seen so far.
#[derive(Debug, Clone, PartialEq)]
pub struct TriageState {
    pub warning_id: WarningId,
    pub features: Vec<f64>,
    pub fuzz: Option<FuzzOutcomeKind>,
}

impl TriageState {
    pub fn len(&self) -> usize {
        self.features.len() + FUZZ_SLOTS
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn fuzz_encoding(&self) -> [f64; FUZZ_SLOTS] {
        let mut enc = [0.0; FUZZ_SLOTS];
        enc[fuzz_slot(self.fuzz)] = 1.0;
        enc
    }

    pub fn can_fuzz(&self) -> bool {
        self.fuzz.is_none()
    }

    /// `[features ‖ fuzz one-hot]` in the network's scalar type.
    pub fn encode<T: crate::Scalar>(&self) -> Vec<T> {
        self.features.iter().copied().chain(self.fuzz_encoding()).map(T::lit).collect()
    }
}

/// Starts an episode for one warning.
pub fn env_reset(warning_id: WarningId, features: &[f64], manifest_len: usize) -> Result<TriageState, EnvError> {
    if features.len() != manifest_len {
        return Err(EnvError::LengthMismatch { expected: manifest_len, found: features.len() });
    }
    Ok(TriageState { warning_id, features: features.to_vec(), fuzz: None })
}

/// Immediate reward of `action`. Classification bonuses apply only when the
/// classification is correct and agrees with the evidence.
pub fn reward_of(action: TriageAction, label: Label, prior: Option<FuzzOutcomeKind>, spec: &RewardSpec) -> Result<f64, EnvError> {
    let predicted = match action {
        TriageAction::Fuzz if prior.is_some() => {
            return Err(EnvError::IllegalAction { action, reason: "warning was already fuzzed" });
        }
        TriageAction::Fuzz => return Ok(spec.fuzz_cost),
        other => other.prediction().expect("classification action"),
    };
    if predicted != label {
        return Ok(spec.incorrect);
    }
    let bonus = match (prior, predicted) {
        (Some(k), Label::TruePositive) if k.is_bug_evidence() => spec.bonus_crash_tp,
        (Some(FuzzOutcomeKind::Clean), Label::FalsePositive) => spec.bonus_clean_fp,
        (Some(FuzzOutcomeKind::Inconclusive), _) => spec.bonus_inconclusive,
        _ => 0.0,
    };
    Ok(spec.correct + bonus)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Step {
    Continue(TriageState),
    Terminal { prediction: Label },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub step: Step,
    /// Zero for classifications of unlabeled warnings.
    pub reward: f64,
    /// Set when the action was `Fuzz`.
    pub outcome: Option<FuzzOutcome>,
}

/// Environment configuration shared by all episodes of a run.
pub struct TriageEnv<'a> {
    pub backend: &'a dyn FuzzBackend,
    pub reward: RewardSpec,
    pub budget_secs: f64,
}

impl<'a> TriageEnv<'a> {
    pub fn new(backend: &'a dyn FuzzBackend, reward: RewardSpec) -> Self {
        Self { backend, reward, budget_secs: DEFAULT_FUZZ_BUDGET_SECS }
    }

    /// Applies `action`. Backend errors become an `InfrastructureFailure`
    /// outcome rather than an error.
    pub fn step(&self, state: &TriageState, action: TriageAction, label: Option<Label>, record: Option<&WarningRecord>) -> Result<Transition, EnvError> {
        match action {
            TriageAction::Fuzz => {
                if !state.can_fuzz() {
                    return Err(EnvError::IllegalAction { action, reason: "warning was already fuzzed" });
                }
                let request = FuzzRequest { id: state.warning_id, label, record };
                let outcome = self
                    .backend
                    .run(&request, self.budget_secs)
                    .unwrap_or_else(|e| FuzzOutcome::infrastructure(e.to_string()));
                let next = TriageState { fuzz: Some(outcome.kind), ..state.clone() };
                Ok(Transition { step: Step::Continue(next), reward: self.reward.fuzz_cost, outcome: Some(outcome) })
            }
            _ => {
                let prediction = action.prediction().expect("classification action");
                let reward = match label {
                    Some(l) => reward_of(action, l, state.fuzz, &self.reward)?,
                    None => 0.0,
                };
                Ok(Transition { step: Step::Terminal { prediction }, reward, outcome: None })
            }
        }
    }
}

/// Free-function form of [`TriageEnv::step`].
pub fn env_step(
    env: &TriageEnv<'_>,
    state: &TriageState,
    action: TriageAction,
    label: Option<Label>,
    record: Option<&WarningRecord>,
) -> Result<Transition, EnvError> {
    env.step(state, action, label, record)
}

/// `G_t = Σ_{k≥t} γ^{k−t} r_k` for every step of one episode.
pub fn discounted_returns(rewards: &[f64], gamma: f64) -> Vec<f64> {
    let mut out = vec![0.0; rewards.len()];
    let mut acc = 0.0;
    for (i, r) in rewards.iter().enumerate().rev() {
        acc = r + gamma * acc;
        out[i] = acc;
    }
    out
}
