use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::TrainError;
use crate::featurizer::FeatureVector;
use crate::fuzz_backend::FuzzOutcome;
use crate::hash::derive_seed;
use crate::policy::{select_action, ConfidenceSignals, PolicyParams, SelectionMode};
use crate::triage_env::{discounted_returns, env_reset, Step, TriageAction, TriageEnv};
use crate::warning_store::{Label, WarningId, WarningRecord};
use crate::Scalar;

const ROLLOUT_TAG: u64 = 0x726f_6c6c;

/// One warning fed to the policy. Features must already be normalized.
#[derive(Debug, Clone, Copy)]
pub struct WarningInput<'a> {
    pub vector: &'a FeatureVector,
    pub label: Option<Label>,
    pub record: Option<&'a WarningRecord>,
}

#[derive(Debug, Clone)]
pub struct StepRecord<T> {
    pub state: Vec<T>,
    pub action: TriageAction,
    /// Log-probability of `action` under the (masked) behavior policy.
    pub logp: f64,
    /// Value estimate in return units.
    pub value: f64,
    pub reward: f64,
    pub mask_fuzz: bool,
}

#[derive(Debug, Clone)]
pub struct Episode<T> {
    pub warning_id: WarningId,
    pub steps: Vec<StepRecord<T>>,
    pub prediction: Label,
    pub fuzz: Option<FuzzOutcome>,
    /// Post-mask probability of `ClassifyTp` at the deciding state.
    pub tp_score: f64,
    pub confidence: ConfidenceSignals,
}

impl<T> Episode<T> {
    pub fn total_reward(&self) -> f64 {
        self.steps.iter().map(|s| s.reward).sum()
    }
}

/// Plays one episode. With `allow_fuzz` false the Fuzz action is masked
/// from the start.
#[allow(clippy::too_many_arguments)]
pub fn play_episode<T: Scalar>(
    params: &PolicyParams<T>,
    env: &TriageEnv<'_>,
    input: WarningInput<'_>,
    mode: SelectionMode,
    allow_fuzz: bool,
    return_scale: f64,
    rng: &mut dyn RngCore,
) -> Result<Episode<T>, TrainError> {
    let id = input.vector.warning_id;
    let mut state = env_reset(id, &input.vector.values, params.shape.input - crate::triage_env::FUZZ_SLOTS)?;
    let mut steps = Vec::with_capacity(2);
    let mut fuzz = None;
    loop {
        let encoded: Vec<T> = state.encode();
        let dist = params.distribution(&encoded)?;
        let mask_fuzz = !allow_fuzz || !state.can_fuzz();
        let (action, confidence) = select_action(&dist, mode, mask_fuzz, rng)?;
        let probs = dist.masked(mask_fuzz)?;
        let transition = env.step(&state, action, input.label, input.record)?;
        steps.push(StepRecord {
            state: encoded,
            action,
            logp: probs[action.index()].ln(),
            value: dist.value * return_scale,
            reward: transition.reward,
            mask_fuzz,
        });
        if transition.outcome.is_some() {
            fuzz = transition.outcome;
        }
        match transition.step {
            Step::Continue(next) => state = next,
            Step::Terminal { prediction } => {
                return Ok(Episode { warning_id: id, steps, prediction, fuzz, tp_score: probs[0], confidence });
            }
        }
    }
}

/// Flattened steps of many episodes with returns and advantages.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryBatch<T> {
    pub states: Vec<Vec<T>>,
    pub actions: Vec<TriageAction>,
    pub logp: Vec<f64>,
    pub rewards: Vec<f64>,
    pub values: Vec<f64>,
    pub episode: Vec<usize>,
    pub terminal: Vec<bool>,
    pub mask_fuzz: Vec<bool>,
    pub returns: Vec<f64>,
    /// Return minus value estimate, before normalization.
    pub raw_advantages: Vec<f64>,
    /// Batch-normalized advantages.
    pub advantages: Vec<f64>,
    pub episode_returns: Vec<f64>,
    pub fuzzed_episodes: usize,
}

impl<T: Scalar> TrajectoryBatch<T> {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn from_episodes(episodes: Vec<Episode<T>>, gamma: f64) -> Self {
        let mut b = TrajectoryBatch {
            states: vec![],
            actions: vec![],
            logp: vec![],
            rewards: vec![],
            values: vec![],
            episode: vec![],
            terminal: vec![],
            mask_fuzz: vec![],
            returns: vec![],
            raw_advantages: vec![],
            advantages: vec![],
            episode_returns: vec![],
            fuzzed_episodes: 0,
        };
        for (e, ep) in episodes.into_iter().enumerate() {
            let rewards: Vec<f64> = ep.steps.iter().map(|s| s.reward).collect();
            let returns = discounted_returns(&rewards, gamma);
            b.episode_returns.push(returns.first().copied().unwrap_or(0.0));
            b.fuzzed_episodes += usize::from(ep.fuzz.is_some());
            let last = ep.steps.len() - 1;
            for (t, (s, g)) in ep.steps.into_iter().zip(returns).enumerate() {
                b.raw_advantages.push(g - s.value);
                b.returns.push(g);
                b.states.push(s.state);
                b.actions.push(s.action);
                b.logp.push(s.logp);
                b.rewards.push(s.reward);
                b.values.push(s.value);
                b.episode.push(e);
                b.terminal.push(t == last);
                b.mask_fuzz.push(s.mask_fuzz);
            }
        }
        b.advantages = normalize_advantages(&b.raw_advantages);
        b
    }

    pub fn mean_return(&self) -> f64 {
        if self.episode_returns.is_empty() {
            0.0
        } else {
            self.episode_returns.iter().sum::<f64>() / self.episode_returns.len() as f64
        }
    }
}

/// Shifts to mean 0 and scales to unit (population) standard deviation;
/// a constant batch only gets centered.
pub fn normalize_advantages(raw: &[f64]) -> Vec<f64> {
    if raw.is_empty() {
        return vec![];
    }
    let n = raw.len() as f64;
    let mean = raw.iter().sum::<f64>() / n;
    let sd = (raw.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n).sqrt();
    let scale = if sd > 1e-8 { sd } else { 1.0 };
    raw.iter().map(|a| (a - mean) / scale).collect()
}

/// One sampled episode per input, in input order. Episode `i` of `epoch`
/// draws from its own stream, so the batch does not depend on scheduling.
pub fn collect_rollouts<T: Scalar>(
    params: &PolicyParams<T>,
    inputs: &[WarningInput<'_>],
    env: &TriageEnv<'_>,
    gamma: f64,
    return_scale: f64,
    seed: u64,
    epoch: u64,
) -> Result<TrajectoryBatch<T>, TrainError> {
    let episodes = inputs
        .par_iter()
        .enumerate()
        .map(|(i, input)| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[ROLLOUT_TAG, epoch, i as u64]));
            play_episode(params, env, *input, SelectionMode::Sample, true, return_scale, &mut rng)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TrajectoryBatch::from_episodes(episodes, gamma))
}
