mod common;

use common::{arg, fixture, pipeline, run};
use triage_core::featurizer::FeatureManifest;

#[test]
fn pipeline_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixture(dir.path());
    let a = pipeline(&f, &dir.path().join("a"));
    let b = pipeline(&f, &dir.path().join("b"));
    for (x, y) in a.outputs.iter().zip(&b.outputs) {
        let (bx, by) = (std::fs::read(x).unwrap(), std::fs::read(y).unwrap());
        assert!(!bx.is_empty(), "{} is empty", x.display());
        assert!(bx == by, "{} differs from {}", x.display(), y.display());
    }
}

#[test]
fn commands_leave_inputs_untouched() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixture(dir.path());
    let inputs = [&f.report, &f.labels, &f.metadata, &f.config];
    let before: Vec<Vec<u8>> = inputs.iter().map(|p| std::fs::read(p).unwrap()).collect();
    let a = pipeline(&f, &dir.path().join("out"));
    let derived = [&a.warnings, &a.splits, &a.features, &a.checkpoint, &a.verdicts];
    let derived_before: Vec<Vec<u8>> = derived.iter().map(|p| std::fs::read(p).unwrap()).collect();
    // A second evaluate and report read the derived files again.
    let cfg = arg(&f.config);
    let o = run(&[
        "--config", &cfg, "evaluate", "--warnings", &arg(&a.warnings), "--splits", &arg(&a.splits), "--features", &arg(&a.features), "--checkpoint",
        &arg(&a.checkpoint), "--out", &arg(&dir.path().join("again.txt")), "--verdicts", &arg(&dir.path().join("again.jsonl")),
    ]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    for (p, b) in inputs.iter().zip(&before) {
        assert!(&std::fs::read(p).unwrap() == b, "{} changed", p.display());
    }
    for (p, b) in derived.iter().zip(&derived_before) {
        assert!(&std::fs::read(p).unwrap() == b, "{} changed", p.display());
    }
}

#[test]
fn triage_writes_one_verdict_per_warning() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixture(dir.path());
    let a = pipeline(&f, &dir.path().join("out"));
    let v = dir.path().join("v.txt");
    let o = run(&["triage", "--report", &arg(&f.report), "--checkpoint", &arg(&a.checkpoint), "--out", &arg(&v)]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    assert!(o.stdout.starts_with("config_digest="));
    let text = std::fs::read_to_string(&v).unwrap();
    assert_eq!(text.lines().count(), 20);
    for line in text.lines() {
        let row: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(matches!(row["predicted"].as_str(), Some("tp" | "fp")), "{line}");
        assert_eq!(row["fuzz_used"], false);
    }
}

#[test]
fn missing_checkpoint_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixture(dir.path());
    let o = run(&["triage", "--report", &arg(&f.report), "--out", &arg(&dir.path().join("v.txt"))]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("checkpoint"), "{}", o.stderr);
}

#[test]
fn unknown_subcommand_and_flags_exit_two() {
    assert_eq!(run(&["frobnicate"]).code, 2);
    assert_eq!(run(&["split", "--no-such-flag"]).code, 2);
    assert_eq!(run::<&str>(&[]).code, 2);
    assert_eq!(run(&["--help"]).code, 0);
}

#[test]
fn digest_mismatch_exits_three_and_names_both_digests() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixture(dir.path());
    let a = pipeline(&f, &dir.path().join("out"));
    let mut ckpt: serde_json::Value = serde_json::from_slice(&std::fs::read(&a.checkpoint).unwrap()).unwrap();
    let bogus = "00000000deadbeef";
    ckpt["manifest_digest"] = bogus.into();
    let forged = dir.path().join("forged.ckpt");
    std::fs::write(&forged, serde_json::to_vec(&ckpt).unwrap()).unwrap();
    let o = run(&[
        "--config", &arg(&f.config), "evaluate", "--warnings", &arg(&a.warnings), "--splits", &arg(&a.splits), "--features", &arg(&a.features),
        "--checkpoint", &arg(&forged),
    ]);
    assert_eq!(o.code, 3, "{}", o.stderr);
    let real = FeatureManifest::v1().digest;
    assert!(o.stderr.contains(bogus), "{}", o.stderr);
    assert!(o.stderr.contains(&real.to_string()), "{}", o.stderr);
}

#[test]
fn missing_input_file_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["split", "--warnings", &arg(&dir.path().join("nope.jsonl"))]);
    assert_eq!(o.code, 3);
    assert!(o.stderr.contains("nope.jsonl"));
}

#[test]
fn malformed_report_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("bad.json");
    std::fs::write(&report, br#"[{"level": "Warning"}]"#).unwrap();
    let o = run(&["ingest", "--report", &arg(&report), "--out", &arg(&dir.path().join("w.jsonl"))]);
    assert_eq!(o.code, 3);
    assert!(o.stderr.contains("analyzer"), "{}", o.stderr);
}

#[test]
fn fuzz_validate_rejects_unknown_ids_and_records_known_ones() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixture(dir.path());
    let warnings = dir.path().join("w.jsonl");
    assert_eq!(run(&["ingest", "--report", &arg(&f.report), "--labels", &arg(&f.labels), "--out", &arg(&warnings)]).code, 0);
    let o = run(&["fuzz-validate", "--warnings", &arg(&warnings), "--ids", "0123456789abcdef"]);
    assert_eq!(o.code, 3);
    assert!(o.stderr.contains("0123456789abcdef"));

    let ids: Vec<String> = std::fs::read_to_string(&warnings)
        .unwrap()
        .lines()
        .take(3)
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["id"].as_str().unwrap().to_string())
        .collect();
    let out = dir.path().join("outcomes.jsonl");
    let o = run(&["--seed", "5", "fuzz-validate", "--warnings", &arg(&warnings), "--ids", &ids.join(","), "--out", &arg(&out)]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 3);
    for (line, id) in text.lines().zip(&ids) {
        assert!(line.contains(id.as_str()), "{line}");
    }
}

#[test]
fn flags_override_config_values() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixture(dir.path());
    let warnings = dir.path().join("w.jsonl");
    let cfg = arg(&f.config);
    let a = run(&["--config", &cfg, "ingest", "--report", &arg(&f.report), "--out", &arg(&warnings)]);
    let b = run(&["--config", &cfg, "--seed", "11", "ingest", "--report", &arg(&f.report), "--out", &arg(&warnings)]);
    let c = run(&["--config", &cfg, "--seed", "12", "ingest", "--report", &arg(&f.report), "--out", &arg(&warnings)]);
    let digest = |s: &str| s.lines().next().unwrap().to_string();
    assert_eq!(digest(&a.stdout), digest(&b.stdout));
    assert_ne!(digest(&a.stdout), digest(&c.stdout));
}

#[test]
fn unknown_config_key_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixture(dir.path());
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "sed = 3\n").unwrap();
    let o = run(&["--config", &arg(&cfg), "ingest", "--report", &arg(&f.report)]);
    assert_eq!(o.code, 3);
    assert!(o.stderr.contains("sed"), "{}", o.stderr);
}

#[test]
fn binary_reports_errors_without_panicking() {
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_triage")).args(["evaluate", "--warnings", "/nonexistent/w.jsonl"]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.starts_with("triage: "), "{err}");
    assert!(!err.contains("panicked"));
}
