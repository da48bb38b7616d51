use rand::{Rng, RngCore};

use super::network::N_ACTIONS;
use super::PolicyError;
use crate::triage_env::TriageAction;

const FUZZ: usize = 2;

/// Action probabilities plus the value estimate of one state.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionDistribution {
    pub probs: [f64; N_ACTIONS],
    pub logits: [f64; N_ACTIONS],
    pub value: f64,
}

/// Softmax over the legal actions; masked actions get probability 0.
pub fn masked_softmax(logits: &[f64; N_ACTIONS], mask_fuzz: bool) -> [f64; N_ACTIONS] {
    let legal = |i: usize| !(mask_fuzz && i == FUZZ);
    let max = (0..N_ACTIONS).filter(|&i| legal(i)).map(|i| logits[i]).fold(f64::NEG_INFINITY, f64::max);
    let mut p = [0.0; N_ACTIONS];
    for i in (0..N_ACTIONS).filter(|&i| legal(i)) {
        p[i] = (logits[i] - max).exp();
    }
    let z: f64 = p.iter().sum();
    p.map(|v| v / z)
}

impl ActionDistribution {
    pub fn from_logits(logits: [f64; N_ACTIONS], value: f64) -> Self {
        Self { probs: masked_softmax(&logits, false), logits, value }
    }

    /// Probabilities with Fuzz zeroed and the rest renormalized.
    pub fn masked(&self, mask_fuzz: bool) -> Result<[f64; N_ACTIONS], PolicyError> {
        let mut p = self.probs;
        if mask_fuzz {
            p[FUZZ] = 0.0;
        }
        let total: f64 = p.iter().sum();
        if !total.is_finite() || total <= 0.0 {
            return Err(PolicyError::DegenerateDistribution);
        }
        Ok(p.map(|v| v / total))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionMode {
    Sample,
    Greedy,
}

/// Confidence of one decision, both computed from the same distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceSignals {
    /// Largest minus second-largest probability.
    pub top2_gap: f64,
    /// Shannon entropy in nats.
    pub entropy: f64,
}

impl ConfidenceSignals {
    pub fn of(probs: &[f64; N_ACTIONS]) -> Self {
        let mut sorted = *probs;
        sorted.sort_by(|a, b| b.total_cmp(a));
        let entropy: f64 = -probs.iter().filter(|&&p| p > 0.0).map(|&p| p * p.ln()).sum::<f64>();
        Self {
            top2_gap: (sorted[0] - sorted[1]).clamp(0.0, 1.0),
            entropy: entropy.clamp(0.0, (N_ACTIONS as f64).ln()),
        }
    }
}

/// Index of the largest probability; the lowest index wins ties.
pub fn greedy_index(probs: &[f64; N_ACTIONS]) -> usize {
    let mut best = 0;
    for i in 1..N_ACTIONS {
        if probs[i] > probs[best] {
            best = i;
        }
    }
    best
}

/// Picks an action and reports confidence on the post-mask distribution.
pub fn select_action(
    dist: &ActionDistribution,
    mode: SelectionMode,
    mask_fuzz: bool,
    rng: &mut dyn RngCore,
) -> Result<(TriageAction, ConfidenceSignals), PolicyError> {
    let p = dist.masked(mask_fuzz)?;
    let index = match mode {
        SelectionMode::Greedy => greedy_index(&p),
        SelectionMode::Sample => {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut chosen = None;
            for (i, &pi) in p.iter().enumerate() {
                if pi > 0.0 {
                    acc += pi;
                    chosen = Some(i);
                    if u < acc {
                        break;
                    }
                }
            }
            chosen.expect("a positive probability exists")
        }
    };
    Ok((TriageAction::from_index(index).expect("index < 3"), ConfidenceSignals::of(&p)))
}
