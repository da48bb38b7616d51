#![allow(dead_code)]

use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use triage_core::warning_store::{parse_report, write_labels, Label, LabelEntry};

pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run<S: AsRef<str>>(args: &[S]) -> Output {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("triage").chain(args.iter().map(AsRef::as_ref));
    let code = triage_cli::run_cli(argv, &mut out, &mut err);
    Output { code, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
}

pub fn arg(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

pub struct Fixture {
    pub report: PathBuf,
    pub labels: PathBuf,
    pub metadata: PathBuf,
    pub config: PathBuf,
}

const ANALYZERS: [(&str, &str, &str); 4] = [
    ("UnsafeDataflow", "Potential unsafe dataflow issue in `{f}`", "unsafe { ptr::read(&self.buf[i]) }"),
    ("SendSyncVariance", "Suspicious impl of `Send` found for `{f}`", "unsafe impl<T> Send for Wrapper<T> {}"),
    ("UnsafeDestructor", "Unsafe block detected in drop of `{f}`", "impl Drop for Guard { fn drop(&mut self) { unsafe { dealloc(self.p) } } }"),
    ("UnsafeDataflow", "Potential unsafe dataflow issue in `{f}`", "let v = Vec::from_raw_parts(p, len, cap);"),
];

const PACKAGES: [&str; 4] = ["aarc-0.3.2", "bumpalo-3.1.0", "smallvec-1.6.0", "arena-0.2.1"];

/// Twenty warnings over four packages, seven labeled true positive, plus a
/// small training config.
pub fn fixture(dir: &Path) -> Fixture {
    let items: Vec<Value> = (0..20)
        .map(|i| {
            let (analyzer, desc, snippet) = ANALYZERS[i % 4];
            let func = format!("func_{i}");
            let line = 10 + 7 * i as u64;
            json!({
                "level": if i % 5 == 0 { "Error" } else { "Warning" },
                "analyzer": analyzer,
                "op_type": if i % 3 == 0 { Value::Null } else { json!("Transmute") },
                "description": desc.replace("{f}", &func),
                "file": format!("{}/src/lib.rs", PACKAGES[i % 4]),
                "start_line": line,
                "start_col": 5,
                "end_line": line + (i as u64 % 6),
                "end_col": 12,
                "code_snippet": snippet,
            })
        })
        .collect();
    let report_bytes = serde_json::to_vec_pretty(&items).unwrap();
    let records = parse_report(&report_bytes).unwrap();
    let labels: Vec<LabelEntry> = records
        .iter()
        .enumerate()
        .map(|(i, r)| LabelEntry {
            warning_id: r.id,
            label: if i % 3 == 1 { Label::TruePositive } else { Label::FalsePositive },
            source: "fixture".into(),
        })
        .collect();
    let metadata: String = PACKAGES
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let name = p.rsplit_once('-').unwrap().0;
            format!(
                "{}\n",
                json!({"name": name, "download_count": 1000 * (k as u64 + 1), "unsafe_prevalence": 0.1 * (k as f64 + 1.0), "total_loc": 5000 + 100 * k as u64})
            )
        })
        .collect();
    let config = "seed = 11\njobs = 2\nepochs_max = 4\nhidden1 = 16\nhidden2 = 8\nminibatch_size = 8\nfuzz_budget_secs = 30\n";

    let f = Fixture {
        report: dir.join("report.json"),
        labels: dir.join("labels.jsonl"),
        metadata: dir.join("metadata.jsonl"),
        config: dir.join("run.toml"),
    };
    std::fs::write(&f.report, report_bytes).unwrap();
    std::fs::write(&f.labels, write_labels(&labels)).unwrap();
    std::fs::write(&f.metadata, metadata).unwrap();
    std::fs::write(&f.config, config).unwrap();
    f
}

pub struct Artifacts {
    pub warnings: PathBuf,
    pub splits: PathBuf,
    pub features: PathBuf,
    pub checkpoint: PathBuf,
    pub verdicts: PathBuf,
    pub eval_report: PathBuf,
    pub outputs: Vec<PathBuf>,
}

fn ok(o: Output, step: &str) {
    assert_eq!(o.code, 0, "{step} failed: {}", o.stderr);
}

/// ingest → split → featurize → train → evaluate → triage → importance → report,
/// all writing under `out`.
pub fn pipeline(f: &Fixture, out: &Path) -> Artifacts {
    let p = |name: &str| out.join(name);
    let cfg = arg(&f.config);
    let (warnings, splits, features) = (p("warnings.jsonl"), p("splits.jsonl"), p("features.jsonl"));
    let (checkpoint, verdicts, eval_report) = (p("policy.ckpt"), p("verdicts.jsonl"), p("eval_report.txt"));
    let data = [
        "--warnings".to_string(),
        arg(&warnings),
        "--splits".into(),
        arg(&splits),
        "--features".into(),
        arg(&features),
    ];
    ok(run(&["--config", &cfg, "ingest", "--report", &arg(&f.report), "--labels", &arg(&f.labels), "--out", &arg(&warnings)]), "ingest");
    ok(run(&["--config", &cfg, "split", "--warnings", &arg(&warnings), "--out", &arg(&splits)]), "split");
    ok(
        run(&["--config", &cfg, "featurize", "--warnings", &arg(&warnings), "--metadata", &arg(&f.metadata), "--out", &arg(&features)]),
        "featurize",
    );
    let mut train = vec!["--config".to_string(), cfg.clone(), "train".into()];
    train.extend(data.iter().cloned());
    train.extend(["--out".into(), arg(&checkpoint), "--log".into(), arg(&p("train.log"))]);
    ok(run(&train), "train");
    let mut eval = vec!["--config".to_string(), cfg.clone(), "evaluate".into()];
    eval.extend(data.iter().cloned());
    eval.extend(["--checkpoint".into(), arg(&checkpoint), "--out".into(), arg(&eval_report), "--verdicts".into(), arg(&verdicts)]);
    ok(run(&eval), "evaluate");
    ok(
        run(&[
            "--config", &cfg, "triage", "--report", &arg(&f.report), "--checkpoint", &arg(&checkpoint), "--metadata", &arg(&f.metadata), "--out",
            &arg(&p("triage.jsonl")),
        ]),
        "triage",
    );
    let mut imp = vec!["--config".to_string(), cfg.clone(), "importance".into(), "--split".into(), "train".into(), "--repeats".into(), "2".into()];
    imp.extend(data.iter().cloned());
    imp.extend(["--checkpoint".into(), arg(&checkpoint), "--out".into(), arg(&p("importance.tsv"))]);
    ok(run(&imp), "importance");
    ok(
        run(&["--config", &cfg, "report", "--verdicts", &arg(&verdicts), "--warnings", &arg(&warnings), "--out", &arg(&p("report.txt"))]),
        "report",
    );
    let outputs = ["warnings.jsonl", "splits.jsonl", "features.jsonl", "policy.ckpt", "train.log", "eval_report.txt", "verdicts.jsonl", "triage.jsonl", "importance.tsv", "report.txt"]
        .iter()
        .map(|n| p(n))
        .collect();
    Artifacts { warnings, splits, features, checkpoint, verdicts, eval_report, outputs }
}
