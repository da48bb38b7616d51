//! Run configuration: a flat TOML file, overridden by command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use triage_core::fuzz_backend::SimOracleConfig;
use triage_core::hash::StableHasher;
use triage_core::trainer::TrainConfig;
use triage_core::triage_env::RewardSpec;
use triage_core::warning_store::{SplitRatios, DEFAULT_CLUSTER_RADIUS};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Simulated,
    Recorded,
    External,
}

/// Every key of the config file. All keys are optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// Worker threads; 0 uses all cores.
    pub jobs: usize,
    pub cluster_radius: u32,
    pub split_train: f64,
    pub split_val: f64,
    pub split_test: f64,

    pub epochs_max: usize,
    pub minibatch_size: usize,
    pub clip_epsilon: f64,
    pub learning_rate: f64,
    pub value_coef: f64,
    pub entropy_coef: f64,
    pub ppo_inner_epochs: usize,
    pub gamma: f64,
    pub patience: usize,
    pub hidden1: usize,
    pub hidden2: usize,
    pub dropout: f64,
    pub return_scale: f64,
    pub fuzz_budget_secs: f64,

    pub reward_correct: f64,
    pub reward_incorrect: f64,
    pub reward_fuzz_cost: f64,
    pub reward_bonus_crash_tp: f64,
    pub reward_bonus_clean_fp: f64,
    pub reward_bonus_inconclusive: f64,

    pub backend: BackendKind,
    pub sim_p_crash_given_tp: f64,
    pub sim_p_crash_given_fp: f64,
    pub sim_p_inconclusive: f64,
    pub fuzz_cmd: Option<String>,
    pub fuzz_pool_size: usize,

    pub reports: Vec<PathBuf>,
    pub labels: Option<PathBuf>,
    pub warnings: Option<PathBuf>,
    pub splits: Option<PathBuf>,
    pub features: Option<PathBuf>,
    pub metadata: Option<PathBuf>,
    pub templates: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    pub recorded: Option<PathBuf>,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let t = TrainConfig::default();
        let r = RewardSpec::default();
        let s = SimOracleConfig::default();
        let ratios = SplitRatios::default();
        Self {
            seed: 0,
            jobs: 0,
            cluster_radius: DEFAULT_CLUSTER_RADIUS,
            split_train: ratios.train,
            split_val: ratios.val,
            split_test: ratios.test,
            epochs_max: t.epochs_max,
            minibatch_size: t.minibatch_size,
            clip_epsilon: t.clip_epsilon,
            learning_rate: t.learning_rate,
            value_coef: t.value_coef,
            entropy_coef: t.entropy_coef,
            ppo_inner_epochs: t.ppo_inner_epochs,
            gamma: t.gamma,
            patience: t.patience,
            hidden1: t.hidden[0],
            hidden2: t.hidden[1],
            dropout: t.dropout,
            return_scale: t.return_scale,
            fuzz_budget_secs: t.fuzz_budget_secs,
            reward_correct: r.correct,
            reward_incorrect: r.incorrect,
            reward_fuzz_cost: r.fuzz_cost,
            reward_bonus_crash_tp: r.bonus_crash_tp,
            reward_bonus_clean_fp: r.bonus_clean_fp,
            reward_bonus_inconclusive: r.bonus_inconclusive,
            backend: BackendKind::Simulated,
            sim_p_crash_given_tp: s.p_crash_given_tp,
            sim_p_crash_given_fp: s.p_crash_given_fp,
            sim_p_inconclusive: s.p_inconclusive,
            fuzz_cmd: None,
            fuzz_pool_size: 4,
            reports: vec![],
            labels: None,
            warnings: None,
            splits: None,
            features: None,
            metadata: None,
            templates: None,
            checkpoint: None,
            recorded: None,
            out_dir: PathBuf::from("."),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Input(format!("config {}: {e}", path.display())))
    }

    /// FNV-1a over the canonical JSON form of the resolved configuration.
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let mut h = StableHasher::new();
        h.write_bytes(json.as_bytes());
        format!("{:016x}", h.finish())
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            epochs_max: self.epochs_max,
            minibatch_size: self.minibatch_size,
            clip_epsilon: self.clip_epsilon,
            learning_rate: self.learning_rate,
            value_coef: self.value_coef,
            entropy_coef: self.entropy_coef,
            ppo_inner_epochs: self.ppo_inner_epochs,
            gamma: self.gamma,
            patience: self.patience,
            seed: self.seed,
            hidden: [self.hidden1, self.hidden2],
            dropout: self.dropout,
            return_scale: self.return_scale,
            fuzz_budget_secs: self.fuzz_budget_secs,
        }
    }

    pub fn reward_spec(&self) -> RewardSpec {
        RewardSpec {
            correct: self.reward_correct,
            incorrect: self.reward_incorrect,
            fuzz_cost: self.reward_fuzz_cost,
            bonus_crash_tp: self.reward_bonus_crash_tp,
            bonus_clean_fp: self.reward_bonus_clean_fp,
            bonus_inconclusive: self.reward_bonus_inconclusive,
            gamma: self.gamma,
        }
    }

    pub fn sim_config(&self) -> SimOracleConfig {
        SimOracleConfig {
            p_crash_given_tp: self.sim_p_crash_given_tp,
            p_crash_given_fp: self.sim_p_crash_given_fp,
            p_inconclusive: self.sim_p_inconclusive,
            seed: self.seed,
        }
    }

    pub fn split_ratios(&self) -> SplitRatios {
        SplitRatios { train: self.split_train, val: self.split_val, test: self.split_test }
    }

    /// `explicit`, else `<out_dir>/<default_name>`.
    pub fn output(&self, explicit: &Option<PathBuf>, default_name: &str) -> PathBuf {
        explicit.clone().unwrap_or_else(|| self.out_dir.join(default_name))
    }
}
