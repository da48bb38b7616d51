//! Metrics, checkpoint evaluation, verdict files and permutation importance.

mod metrics;

pub use metrics::{auc_roc, average_precision, compute_metrics, mcc, Confusion, EvalError, EvalReport, Metric, Prediction};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::featurizer::{FeatureManifest, FeatureVector};
use crate::fuzz_backend::{FuzzBackend, FuzzOutcomeKind};
use crate::hash::derive_seed;
use crate::jsonl::{read_jsonl, write_jsonl, LineError};
use crate::policy::{PolicyParams, SelectionMode};
use crate::trainer::{play_episode, CheckpointError, PolicyCheckpoint, TrainError, WarningInput};
use crate::triage_env::TriageEnv;
use crate::warning_store::{Label, WarningId};
use crate::Scalar;

const IMPORTANCE_TAG: u64 = 0x696d_7072;

/// Per-warning decision as persisted in the verdicts file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub warning_id: WarningId,
    pub predicted: Label,
    pub score: f64,
    pub fuzz_used: bool,
    pub fuzz_kind: Option<FuzzOutcomeKind>,
}

impl Verdict {
    pub fn prediction(&self) -> Prediction {
        Prediction { predicted: self.predicted, score: self.score, fuzz_used: self.fuzz_used }
    }
}

pub fn write_verdicts(verdicts: &[Verdict]) -> String {
    write_jsonl(verdicts)
}

pub fn read_verdicts(text: &str) -> Result<Vec<Verdict>, LineError> {
    read_jsonl(text)
}

pub fn verdict_metrics(verdicts: &[Verdict], labels: &[Label]) -> Result<EvalReport, EvalError> {
    let predictions: Vec<Prediction> = verdicts.iter().map(Verdict::prediction).collect();
    compute_metrics(&predictions, labels)
}

/// One greedy episode per (already normalized) input, in input order.
pub fn run_greedy<T: Scalar>(
    params: &PolicyParams<T>,
    env: &TriageEnv<'_>,
    inputs: &[WarningInput<'_>],
    allow_fuzz: bool,
) -> Result<Vec<Verdict>, TrainError> {
    inputs
        .par_iter()
        .map(|input| {
            // Greedy selection never draws; the stream is only a placeholder.
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            let ep = play_episode(params, env, *input, SelectionMode::Greedy, allow_fuzz, 1.0, &mut rng)?;
            Ok(Verdict {
                warning_id: ep.warning_id,
                predicted: ep.prediction,
                score: ep.tp_score.clamp(0.0, 1.0),
                fuzz_used: ep.fuzz.is_some(),
                fuzz_kind: ep.fuzz.map(|o| o.kind),
            })
        })
        .collect()
}

#[derive(Debug, thiserror::Error)]
pub enum EvaluateError {
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error(transparent)]
    Run(#[from] TrainError),
    #[error(transparent)]
    Metrics(#[from] EvalError),
    #[error("warning {0} has no label")]
    Unlabeled(WarningId),
}

/// Normalizes raw feature vectors with the checkpoint's statistics after
/// checking their manifest digest.
pub fn normalize_for(ckpt: &PolicyCheckpoint, vectors: &[&FeatureVector]) -> Result<Vec<FeatureVector>, EvaluateError> {
    vectors
        .iter()
        .map(|v| {
            ckpt.check_digest(v.manifest_digest)?;
            ckpt.normalizer.normalize(v).map_err(|e| EvaluateError::Run(e.into()))
        })
        .collect()
}

/// Greedy verdicts for raw (unnormalized) inputs; labels are optional.
pub fn triage_with_checkpoint(
    ckpt: &PolicyCheckpoint,
    inputs: &[WarningInput<'_>],
    backend: &dyn FuzzBackend,
    allow_fuzz: bool,
) -> Result<Vec<Verdict>, EvaluateError> {
    let raw: Vec<&FeatureVector> = inputs.iter().map(|i| i.vector).collect();
    let normalized = normalize_for(ckpt, &raw)?;
    let bound: Vec<WarningInput<'_>> =
        inputs.iter().zip(&normalized).map(|(i, v)| WarningInput { vector: v, label: i.label, record: i.record }).collect();
    let params = ckpt.params::<f64>().map_err(CheckpointError::from)?;
    let mut env = TriageEnv::new(backend, ckpt.reward.clone());
    env.budget_secs = ckpt.config.fuzz_budget_secs;
    Ok(run_greedy(&params, &env, &bound, allow_fuzz)?)
}

/// Greedy evaluation of labeled raw inputs: the report and per-warning verdicts.
pub fn evaluate_checkpoint(
    ckpt: &PolicyCheckpoint,
    inputs: &[WarningInput<'_>],
    backend: &dyn FuzzBackend,
    allow_fuzz: bool,
) -> Result<(EvalReport, Vec<Verdict>), EvaluateError> {
    let labels = inputs.iter().map(|i| i.label.ok_or(EvaluateError::Unlabeled(i.vector.warning_id))).collect::<Result<Vec<_>, _>>()?;
    let verdicts = triage_with_checkpoint(ckpt, inputs, backend, allow_fuzz)?;
    Ok((verdict_metrics(&verdicts, &labels)?, verdicts))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureImportance {
    pub feature: String,
    pub index: usize,
    /// Mean F1 drop over the repeats.
    pub mean_delta: f64,
}

/// Permutation importance with F1 as the metric, fuzzing masked. Each
/// column is shuffled across the split `repeats` times from its own seeded
/// stream; features are ranked by mean F1 drop, ties by manifest order.
pub fn permutation_importance(
    ckpt: &PolicyCheckpoint,
    manifest: &FeatureManifest,
    inputs: &[WarningInput<'_>],
    backend: &dyn FuzzBackend,
    repeats: usize,
    seed: u64,
) -> Result<Vec<FeatureImportance>, EvaluateError> {
    let repeats = repeats.max(1);
    ckpt.check_digest(manifest.digest)?;
    let labels = inputs.iter().map(|i| i.label.ok_or(EvaluateError::Unlabeled(i.vector.warning_id))).collect::<Result<Vec<_>, _>>()?;
    let (base, _) = evaluate_checkpoint(ckpt, inputs, backend, false)?;
    let base_f1 = base.f1.or_zero();
    let raw: Vec<&FeatureVector> = inputs.iter().map(|i| i.vector).collect();
    let normalized = normalize_for(ckpt, &raw)?;
    let params = ckpt.params::<f64>().map_err(CheckpointError::from)?;
    let env = TriageEnv::new(backend, ckpt.reward.clone());

    let mut ranked = Vec::with_capacity(manifest.len());
    for (j, name) in manifest.names().enumerate() {
        let mut total = 0.0;
        for r in 0..repeats {
            let mut column: Vec<f64> = normalized.iter().map(|v| v.values[j]).collect();
            column.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(seed, &[IMPORTANCE_TAG, j as u64, r as u64])));
            let permuted: Vec<FeatureVector> = normalized
                .iter()
                .zip(&column)
                .map(|(v, &x)| {
                    let mut p = v.clone();
                    p.values[j] = x;
                    p
                })
                .collect();
            let bound: Vec<WarningInput<'_>> = permuted.iter().map(|v| WarningInput { vector: v, label: None, record: None }).collect();
            let verdicts = run_greedy(&params, &env, &bound, false)?;
            total += base_f1 - verdict_metrics(&verdicts, &labels)?.f1.or_zero();
        }
        ranked.push(FeatureImportance { feature: name.to_string(), index: j, mean_delta: total / repeats as f64 });
    }
    ranked.sort_by(|a, b| b.mean_delta.total_cmp(&a.mean_delta).then(a.index.cmp(&b.index)));
    Ok(ranked)
}

#[cfg(test)]
mod tests;
