//! PPO training: rollouts over labeled warnings, clipped-surrogate updates
//! with an in-tree Adam optimizer, validation-F1 model selection and
//! checkpointing.

mod checkpoint;
mod config;
mod ppo;
mod rollout;

pub use checkpoint::{CheckpointError, EpochLog, PolicyCheckpoint, TrainingHistory, CHECKPOINT_FORMAT_VERSION};
pub use config::TrainConfig;
pub use ppo::{clipped_surrogate, ppo_loss_and_grad, ppo_update, Adam, LossReport};
pub use rollout::{collect_rollouts, normalize_advantages, play_episode, Episode, StepRecord, TrajectoryBatch, WarningInput};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::evaluator::{run_greedy, verdict_metrics};
use crate::featurizer::{fit_normalizer, FeatureError, FeatureManifest, FeatureVector, ManifestDigest, NormalizeError};
use crate::fuzz_backend::FuzzBackend;
use crate::hash::derive_seed;
use crate::policy::{PolicyError, PolicyParams, PolicyShape};
use crate::triage_env::{reward_of, EnvError, RewardSpec, TriageAction, TriageEnv, FUZZ_SLOTS};
use crate::warning_store::{Label, Split, WarningId};
use crate::Scalar;

const INIT_TAG: u64 = 0x696e_6974;
const UPDATE_TAG: u64 = 0x7570_6474;

#[derive(Debug, thiserror::Error)]
pub enum TrainError {
    #[error("{0} split is empty")]
    EmptySplit(Split),
    #[error("manifest digest mismatch for warning {id}: expected {expected}, found {found}")]
    DigestMismatch { id: WarningId, expected: ManifestDigest, found: ManifestDigest },
    #[error("training warning {0} has no label")]
    Unlabeled(WarningId),
    #[error("invalid training configuration: {0}")]
    Config(String),
    #[error("non-finite loss in inner epoch {inner_epoch}, minibatch {minibatch} (rows {rows:?})")]
    NonFiniteLoss { inner_epoch: usize, minibatch: usize, rows: Vec<usize> },
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Normalize(#[from] NormalizeError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Eval(#[from] crate::evaluator::EvalError),
}

/// Episode return implied by a greedy verdict.
pub fn verdict_return(verdict: &crate::evaluator::Verdict, label: Label, reward: &RewardSpec) -> f64 {
    let action = if verdict.predicted.is_positive() { TriageAction::ClassifyTp } else { TriageAction::ClassifyFp };
    let terminal = reward_of(action, label, verdict.fuzz_kind, reward).expect("classification is always legal");
    if verdict.fuzz_used {
        reward.fuzz_cost + reward.gamma * terminal
    } else {
        terminal
    }
}

/// Pairs inputs with their normalized vectors.
fn rebind<'a>(set: &[WarningInput<'_>], vecs: &'a [FeatureVector]) -> Vec<WarningInput<'a>> {
    set.iter().zip(vecs).map(|(i, v)| WarningInput { vector: v, label: i.label, record: None }).collect()
}

fn check_inputs(inputs: &[WarningInput<'_>], split: Split, digest: ManifestDigest) -> Result<(), TrainError> {
    if inputs.is_empty() {
        return Err(TrainError::EmptySplit(split));
    }
    for input in inputs {
        let v = input.vector;
        if v.manifest_digest != digest {
            return Err(TrainError::DigestMismatch { id: v.warning_id, expected: digest, found: v.manifest_digest });
        }
        if input.label.is_none() {
            return Err(TrainError::Unlabeled(v.warning_id));
        }
    }
    Ok(())
}

/// Trains a policy with scalar type `T` and returns the checkpoint of the
/// epoch with the best validation F1. `log` receives one entry per epoch.
pub fn train<T: Scalar>(
    manifest: &FeatureManifest,
    train_set: &[WarningInput<'_>],
    val_set: &[WarningInput<'_>],
    config: &TrainConfig,
    reward: &RewardSpec,
    backend: &dyn FuzzBackend,
    log: &mut dyn FnMut(&EpochLog),
) -> Result<PolicyCheckpoint, TrainError> {
    config.validate().map_err(TrainError::Config)?;
    if reward.gamma != config.gamma {
        return Err(TrainError::Config(format!("reward gamma {} differs from training gamma {}", reward.gamma, config.gamma)));
    }
    check_inputs(train_set, Split::Train, manifest.digest)?;
    check_inputs(val_set, Split::Val, manifest.digest)?;

    let raw: Vec<&FeatureVector> = train_set.iter().map(|i| i.vector).collect();
    let normalizer = fit_normalizer(manifest, &raw, Split::Train)?;
    let normalize_all = |set: &[WarningInput<'_>]| -> Result<Vec<FeatureVector>, TrainError> {
        set.iter().map(|i| normalizer.normalize(i.vector).map_err(TrainError::from)).collect()
    };
    let train_vecs = normalize_all(train_set)?;
    let val_vecs = normalize_all(val_set)?;
    let train_inputs = rebind(train_set, &train_vecs);
    let val_inputs = rebind(val_set, &val_vecs);
    let val_labels: Vec<_> = val_set.iter().map(|i| i.label.expect("checked")).collect();

    let shape = PolicyShape { input: manifest.len() + FUZZ_SLOTS, hidden: config.hidden };
    let mut params = PolicyParams::<T>::init(shape, config.dropout, derive_seed(config.seed, &[INIT_TAG]));
    let mut optimizer = Adam::new(params.weights.len(), config.learning_rate);
    let mut env = TriageEnv::new(backend, reward.clone());
    env.budget_secs = config.fuzz_budget_secs;

    let mut history = TrainingHistory::default();
    let mut best: Option<(f64, f64, PolicyParams<T>)> = None;
    let mut stale = 0usize;
    for epoch in 1..=config.epochs_max {
        let batch = collect_rollouts(&params, &train_inputs, &env, config.gamma, config.return_scale, config.seed, epoch as u64)?;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, &[UPDATE_TAG, epoch as u64]));
        ppo_update(&mut params, &mut optimizer, &batch, config, &mut rng)?;

        let verdicts = run_greedy(&params, &env, &val_inputs, true)?;
        let report = verdict_metrics(&verdicts, &val_labels)?;
        let val_return = verdicts.iter().zip(&val_labels).map(|(v, &l)| verdict_return(v, l, reward)).sum::<f64>() / verdicts.len() as f64;
        let entry = EpochLog {
            epoch,
            mean_return: batch.mean_return(),
            val_accuracy: report.accuracy,
            val_f1: report.f1.or_zero(),
            val_return,
            fuzz_rate: report.fuzz_invocation_rate,
        };
        log(&entry);
        // F1 first; equal F1 is broken by validation return.
        let improved = best.as_ref().is_none_or(|(f1, ret, _)| entry.val_f1 > *f1 || (entry.val_f1 == *f1 && entry.val_return > *ret));
        if improved {
            best = Some((entry.val_f1, entry.val_return, params.clone()));
            history.best_epoch = epoch;
            stale = 0;
        } else {
            stale += 1;
        }
        history.epochs.push(entry);
        if stale >= config.patience {
            break;
        }
    }
    let (_, _, best_params) = best.expect("at least one epoch ran");
    Ok(PolicyCheckpoint::new(&best_params, normalizer, config.clone(), reward.clone(), history))
}
