use super::*;
use crate::featurizer::NormalizerStats;
use crate::fuzz_backend::{SimOracleConfig, SimulatedBackend};
use crate::policy::PolicyShape;
use crate::synthetic::SyntheticTask;
use crate::trainer::{train, TrainConfig, TrainingHistory};
use crate::triage_env::{RewardSpec, FUZZ_SLOTS};
use crate::warning_store::Split;
use proptest::prelude::*;
use rand::Rng;

use Label::{FalsePositive as N, TruePositive as P};

fn preds(labels: &[Label], scores: &[f64]) -> Vec<Prediction> {
    labels.iter().zip(scores).map(|(&predicted, &score)| Prediction { predicted, score, fuzz_used: false }).collect()
}

#[test]
fn all_positive_baseline_row() {
    // 256 positives out of 1000.
    let labels: Vec<Label> = (0..1000).map(|i| if i < 256 { P } else { N }).collect();
    let r = compute_metrics(&preds(&[P; 1000], &[1.0; 1000]), &labels).unwrap();
    assert!((r.precision.value().unwrap() - 0.256).abs() < 1e-12);
    assert_eq!(r.recall.value(), Some(1.0));
    assert!((r.f1.value().unwrap() - 0.407).abs() < 0.001);
    assert_eq!(r.mcc, 0.0);
    assert_eq!(r.auc_roc, Metric::Defined(0.5));
}

#[test]
fn confusion_example() {
    let predicted = [P, P, P, P, N, N, N, N, N, N];
    let actual = [P, P, P, N, P, N, N, N, N, N];
    let r = compute_metrics(&preds(&predicted, &[0.5; 10]), &actual).unwrap();
    assert_eq!(r.confusion, Confusion { tp: 3, fp: 1, fn_: 1, tn: 5 });
    assert_eq!(r.precision.value(), Some(0.75));
    assert_eq!(r.recall.value(), Some(0.75));
    assert_eq!(r.f1.value(), Some(0.75));
    assert!((r.mcc - 14.0 / 24.0).abs() < 1e-12);
}

#[test]
fn perfect_classifier() {
    let labels = [P, N, P, N, N];
    let scores = [0.9, 0.1, 0.8, 0.2, 0.3];
    let r = compute_metrics(&preds(&labels, &scores), &labels).unwrap();
    for m in [r.precision.value(), r.recall.value(), r.f1.value(), r.auc_roc.value(), r.auc_pr.value()] {
        assert_eq!(m, Some(1.0));
    }
    assert_eq!((r.accuracy, r.mcc), (1.0, 1.0));
}

#[test]
fn undefined_metrics_have_reasons() {
    let r = compute_metrics(&preds(&[N, N], &[0.2, 0.3]), &[N, N]).unwrap();
    assert!(matches!(r.precision, Metric::Undefined(_)));
    assert!(matches!(r.recall, Metric::Undefined(_)));
    assert!(matches!(r.auc_roc, Metric::Undefined(_)));
    assert!(r.to_kv().contains("precision=undefined (no predicted positives)\n"));
    assert_eq!(compute_metrics(&[], &[]), Err(EvalError::EmptyInput));
    assert!(matches!(compute_metrics(&preds(&[P], &[1.5]), &[P]), Err(EvalError::InvalidScore { .. })));
}

#[test]
fn report_keys_are_stable() {
    let r = compute_metrics(&preds(&[P, N], &[0.7, 0.4]), &[P, P]).unwrap();
    let kv = r.to_kv();
    let keys: Vec<&str> = kv.lines().map(|l| l.split('=').next().unwrap()).collect();
    assert_eq!(keys, ["n", "tp", "fp", "fn", "tn", "accuracy", "precision", "recall", "f1", "mcc", "auc_roc", "auc_pr", "fuzz_invocation_rate"]);
}

/// Brute-force AUC over all positive/negative pairs.
fn pairwise_auc(scores: &[f64], labels: &[Label]) -> Option<f64> {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for i in 0..scores.len() {
        for j in 0..scores.len() {
            if labels[i].is_positive() && !labels[j].is_positive() {
                pairs += 1.0;
                wins += if scores[i] > scores[j] { 1.0 } else if scores[i] == scores[j] { 0.5 } else { 0.0 };
            }
        }
    }
    (pairs > 0.0).then(|| wins / pairs)
}

/// Average precision by sweeping every distinct threshold.
fn threshold_ap(scores: &[f64], labels: &[Label]) -> Option<f64> {
    let pos = labels.iter().filter(|l| l.is_positive()).count() as f64;
    if pos == 0.0 {
        return None;
    }
    let mut thresholds: Vec<f64> = scores.to_vec();
    thresholds.sort_by(|a, b| b.total_cmp(a));
    thresholds.dedup();
    let (mut ap, mut prev) = (0.0, 0.0);
    for t in thresholds {
        let sel: Vec<usize> = (0..scores.len()).filter(|&i| scores[i] >= t).collect();
        let tp = sel.iter().filter(|&&i| labels[i].is_positive()).count() as f64;
        ap += (tp / pos - prev) * (tp / sel.len() as f64);
        prev = tp / pos;
    }
    Some(ap)
}

#[test]
fn matches_brute_force_oracle_on_random_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..1000 {
        let n = rng.random_range(1..60);
        let labels: Vec<Label> = (0..n).map(|_| if rng.random_bool(0.3) { P } else { N }).collect();
        let predicted: Vec<Label> = (0..n).map(|_| if rng.random_bool(0.5) { P } else { N }).collect();
        // Coarse scores force ties.
        let scores: Vec<f64> = (0..n).map(|_| f64::from(rng.random_range(0..8u8)) / 7.0).collect();
        let r = compute_metrics(&preds(&predicted, &scores), &labels).unwrap();
        let (mut tp, mut fp, mut fne, mut tn) = (0, 0, 0, 0);
        for i in 0..n {
            match (predicted[i], labels[i]) {
                (P, P) => tp += 1,
                (P, N) => fp += 1,
                (N, P) => fne += 1,
                (N, N) => tn += 1,
            }
        }
        assert_eq!(r.confusion, Confusion { tp, fp, fn_: fne, tn });
        assert_eq!(r.accuracy, (tp + tn) as f64 / n as f64);
        assert_eq!(r.precision.value(), (tp + fp > 0).then(|| tp as f64 / (tp + fp) as f64));
        assert_eq!(r.recall.value(), (tp + fne > 0).then(|| tp as f64 / (tp + fne) as f64));
        match (r.auc_roc.value(), pairwise_auc(&scores, &labels)) {
            (Some(a), Some(b)) => assert!((a - b).abs() < 1e-9),
            (a, b) => assert_eq!(a, b),
        }
        match (r.auc_pr.value(), threshold_ap(&scores, &labels)) {
            (Some(a), Some(b)) => assert!((a - b).abs() < 1e-9),
            (a, b) => assert_eq!(a, b),
        }
        if let (Some(p), Some(rc), Some(f1)) = (r.precision.value(), r.recall.value(), r.f1.value()) {
            if p + rc > 0.0 {
                assert!((f1 - 2.0 * p * rc / (p + rc)).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn random_scores_have_chance_auc() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let labels: Vec<Label> = (0..10_000).map(|_| if rng.random_bool(0.4) { P } else { N }).collect();
    let scores: Vec<f64> = (0..10_000).map(|_| rng.random::<f64>()).collect();
    assert!((auc_roc(&scores, &labels).value().unwrap() - 0.5).abs() < 0.02);
}

proptest! {
    #[test]
    fn mcc_flips_sign_on_complement(bits in prop::collection::vec(any::<bool>(), 1..40)) {
        // Balanced set: first half positive.
        let n = bits.len() * 2;
        let labels: Vec<Label> = (0..n).map(|i| if i < n / 2 { P } else { N }).collect();
        let predicted: Vec<Label> = (0..n).map(|i| if bits[i % bits.len()] ^ (i >= n / 2) { P } else { N }).collect();
        let flipped: Vec<Label> = predicted.iter().map(|l| if *l == P { N } else { P }).collect();
        let a = compute_metrics(&preds(&predicted, &vec![0.5; n]), &labels).unwrap().mcc;
        let b = compute_metrics(&preds(&flipped, &vec![0.5; n]), &labels).unwrap().mcc;
        prop_assert!((a + b).abs() < 1e-12);
    }
}

fn uniform_checkpoint(task: &SyntheticTask) -> PolicyCheckpoint {
    let shape = PolicyShape { input: task.manifest.len() + FUZZ_SLOTS, hidden: [4, 4] };
    let params = PolicyParams::<f64>::zeros(shape, 0.0);
    let n = task.manifest.len();
    let normalizer = NormalizerStats {
        mean: vec![0.0; n],
        sd: vec![1.0; n],
        passthrough: vec![false; n],
        fitted_on: Split::Train,
        manifest_digest: task.manifest.digest,
    };
    let config = TrainConfig { hidden: [4, 4], dropout: 0.0, ..TrainConfig::default() };
    PolicyCheckpoint::new(&params, normalizer, config, RewardSpec::default(), TrainingHistory::default())
}

#[test]
fn uniform_policy_classifies_everything_positive() {
    let task = SyntheticTask::separable(40, 10, 0);
    let ckpt = uniform_checkpoint(&task);
    let backend = SimulatedBackend::new(SimOracleConfig::default()).unwrap();
    let inputs = task.inputs(Split::Test);
    let (report, verdicts) = evaluate_checkpoint(&ckpt, &inputs, &backend, true).unwrap();
    assert_eq!(report.recall.value(), Some(1.0));
    let base = inputs.iter().filter(|i| i.label == Some(P)).count() as f64 / inputs.len() as f64;
    assert_eq!(report.precision.value(), Some(base));
    assert_eq!(report.fuzz_invocation_rate, 0.0);
    assert!(verdicts.iter().all(|v| v.score == 1.0 / 3.0 && v.predicted == P));

    let text = write_verdicts(&verdicts);
    let reread = read_verdicts(&text).unwrap();
    assert_eq!(reread, verdicts);
    let labels: Vec<Label> = inputs.iter().map(|i| i.label.unwrap()).collect();
    assert_eq!(verdict_metrics(&reread, &labels).unwrap(), report);
}

#[test]
fn evaluation_rejects_foreign_features() {
    let task = SyntheticTask::separable(40, 10, 0);
    let mut ckpt = uniform_checkpoint(&task);
    ckpt.manifest_digest = FeatureManifest::v1().digest;
    let backend = SimulatedBackend::new(SimOracleConfig::default()).unwrap();
    let err = evaluate_checkpoint(&ckpt, &task.inputs(Split::Test), &backend, true).unwrap_err();
    assert!(matches!(err, EvaluateError::Checkpoint(CheckpointError::DigestMismatch { .. })));
}

#[test]
fn permutation_importance_basics() {
    let task = SyntheticTask::separable(120, 40, 4);
    let backend = SimulatedBackend::new(SimOracleConfig::default()).unwrap();
    let cfg = TrainConfig { hidden: [16, 8], epochs_max: 5, seed: 1, ..TrainConfig::default() };
    let ckpt = train::<f64>(&task.manifest, &task.inputs(Split::Train), &task.inputs(Split::Val), &cfg, &RewardSpec::default(), &backend, &mut |_| {}).unwrap();
    let inputs = task.inputs(Split::Test);
    let a = permutation_importance(&ckpt, &task.manifest, &inputs, &backend, 2, 3).unwrap();
    let b = permutation_importance(&ckpt, &task.manifest, &inputs, &backend, 2, 3).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len(), task.manifest.len());
    // Every synthetic warning has clarity 1, so permuting it changes nothing.
    let clarity = a.iter().find(|f| f.feature == "clarity").unwrap();
    assert_eq!(clarity.mean_delta, 0.0);
}
