use proptest::prelude::*;
use triage_core::evaluator::evaluate_checkpoint;
use triage_core::fuzz_backend::{SimOracleConfig, SimulatedBackend};
use triage_core::synthetic::SyntheticTask;
use triage_core::trainer::{train, PolicyCheckpoint, TrainConfig};
use triage_core::triage_env::RewardSpec;
use triage_core::warning_store::Split;

fn fit(task: &SyntheticTask, sim: SimOracleConfig, cfg: &TrainConfig) -> PolicyCheckpoint {
    let backend = SimulatedBackend::new(sim).unwrap();
    train::<f64>(&task.manifest, &task.inputs(Split::Train), &task.inputs(Split::Val), cfg, &RewardSpec::default(), &backend, &mut |_| {}).unwrap()
}

#[test]
fn uninformative_fuzzing_is_not_farmed() {
    // Every run is inconclusive: fuzzing costs 5 and returns at most 3.
    let task = SyntheticTask::separable(1000, 256, 7);
    let sim = SimOracleConfig { p_crash_given_tp: 0.0, p_crash_given_fp: 0.0, p_inconclusive: 1.0, seed: 0 };
    let ckpt = fit(&task, sim, &TrainConfig { epochs_max: 50, seed: 7, ..TrainConfig::default() });
    let best = ckpt.history.best().unwrap();
    assert!(best.fuzz_rate <= 0.05, "{}", best.line());
    let backend = SimulatedBackend::new(sim).unwrap();
    let (report, _) = evaluate_checkpoint(&ckpt, &task.inputs(Split::Test), &backend, true).unwrap();
    assert!(report.fuzz_invocation_rate <= 0.05, "test fuzz rate {}", report.fuzz_invocation_rate);
    assert!(report.accuracy >= 0.95, "accuracy {}", report.accuracy);
}

#[test]
fn history_is_consistent_with_the_selected_epoch() {
    let task = SyntheticTask::separable(300, 80, 2);
    let cfg = TrainConfig { epochs_max: 8, patience: 3, seed: 4, hidden: [32, 16], ..TrainConfig::default() };
    let ckpt = fit(&task, SimOracleConfig::default(), &cfg);
    let h = &ckpt.history;
    assert!(!h.epochs.is_empty() && h.epochs.len() <= 8);
    let best = h.best().unwrap();
    let top = h.epochs.iter().map(|e| e.val_f1).fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(best.val_f1, top);
    assert!(h.epochs.iter().enumerate().all(|(i, e)| e.epoch == i + 1));
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 4, ..ProptestConfig::default() })]

    #[test]
    fn same_seed_same_checkpoint(seed in 0u64..1000) {
        let task = SyntheticTask::separable(120, 30, seed);
        let cfg = TrainConfig { epochs_max: 3, seed, hidden: [16, 8], minibatch_size: 16, ..TrainConfig::default() };
        let a = fit(&task, SimOracleConfig { seed, ..SimOracleConfig::default() }, &cfg);
        let b = fit(&task, SimOracleConfig { seed, ..SimOracleConfig::default() }, &cfg);
        prop_assert_eq!(a.to_bytes(), b.to_bytes());
    }
}
