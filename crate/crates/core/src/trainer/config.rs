use serde::{Deserialize, Serialize};

use crate::policy::{DEFAULT_DROPOUT, DEFAULT_HIDDEN};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs_max: usize,
    pub minibatch_size: usize,
    pub clip_epsilon: f64,
    pub learning_rate: f64,
    pub value_coef: f64,
    pub entropy_coef: f64,
    pub ppo_inner_epochs: usize,
    pub gamma: f64,
    pub patience: usize,
    pub seed: u64,
    pub hidden: [usize; 2],
    pub dropout: f64,
    /// The value head predicts returns divided by this.
    pub return_scale: f64,
    pub fuzz_budget_secs: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs_max: 200,
            minibatch_size: 64,
            clip_epsilon: 0.2,
            learning_rate: 3e-4,
            value_coef: 0.5,
            entropy_coef: 0.01,
            ppo_inner_epochs: 4,
            gamma: 1.0,
            patience: 10,
            seed: 0,
            hidden: DEFAULT_HIDDEN,
            dropout: DEFAULT_DROPOUT,
            return_scale: 25.0,
            fuzz_budget_secs: 30.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), String> {
        let checks: [(bool, &str); 10] = [
            (self.epochs_max > 0, "epochs_max must be positive"),
            (self.minibatch_size > 0, "minibatch_size must be positive"),
            (self.clip_epsilon > 0.0 && self.clip_epsilon < 1.0, "clip_epsilon must lie in (0, 1)"),
            (self.learning_rate > 0.0 && self.learning_rate.is_finite(), "learning_rate must be positive"),
            (self.value_coef >= 0.0 && self.entropy_coef >= 0.0, "loss coefficients must be non-negative"),
            (self.ppo_inner_epochs > 0, "ppo_inner_epochs must be positive"),
            (self.gamma > 0.0 && self.gamma <= 1.0, "gamma must lie in (0, 1]"),
            (self.hidden.iter().all(|&h| h > 0), "hidden sizes must be positive"),
            ((0.0..1.0).contains(&self.dropout), "dropout must lie in [0, 1)"),
            (self.return_scale > 0.0 && self.fuzz_budget_secs >= 0.0, "return_scale must be positive and fuzz_budget_secs non-negative"),
        ];
        match checks.iter().find(|(ok, _)| !ok) {
            Some((_, msg)) => Err((*msg).to_string()),
            None => Ok(()),
        }
    }
}
