use std::collections::BTreeMap;
use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};

use triage_core::evaluator::{evaluate_checkpoint, permutation_importance, triage_with_checkpoint, verdict_metrics, write_verdicts, EvaluateError, read_verdicts};
use triage_core::featurizer::{extract_features, read_feature_sidecar, read_package_metadata, write_feature_sidecar, ExtractionMode, FeatureManifest, FeatureVector, PackageMetadata};
use triage_core::fuzz_backend::{write_recorded, ExternalBackend, FuzzBackend, FuzzRequest, RecordedBackend, RecordedOutcome, SimulatedBackend, TemplateSet};
use triage_core::trainer::{train, CheckpointError, PolicyCheckpoint, TrainError, WarningInput};
use triage_core::warning_store::{
    assign_clusters, attach_labels, cluster_sizes, parse_report, read_labels, read_split_file, read_warnings, stratified_split, write_split_file, write_warnings, Label, Split, SplitAssignment, WarningId, WarningRecord,
};

use crate::config::{BackendKind, RunConfig};
use crate::{Cli, CliError, Command, DatasetArgs};

trait OrInput<T> {
    fn input(self, what: &dyn Display) -> Result<T, CliError>;
    fn internal(self, what: &dyn Display) -> Result<T, CliError>;
}

impl<T, E: Display> OrInput<T> for Result<T, E> {
    fn input(self, what: &dyn Display) -> Result<T, CliError> {
        self.map_err(|e| CliError::Input(format!("{what}: {e}")))
    }
    fn internal(self, what: &dyn Display) -> Result<T, CliError> {
        self.map_err(|e| CliError::Internal(format!("{what}: {e}")))
    }
}

fn train_error(e: TrainError) -> CliError {
    match e {
        TrainError::NonFiniteLoss { .. } | TrainError::Policy(_) | TrainError::Env(_) => CliError::Internal(e.to_string()),
        other => CliError::Input(other.to_string()),
    }
}

fn eval_error(e: EvaluateError) -> CliError {
    match e {
        EvaluateError::Run(t) => train_error(t),
        EvaluateError::Checkpoint(CheckpointError::Io(io)) => CliError::Internal(io.to_string()),
        other => CliError::Input(other.to_string()),
    }
}

fn require(value: &Option<PathBuf>, flag: &str) -> Result<PathBuf, CliError> {
    value.clone().ok_or_else(|| CliError::Usage(format!("missing required --{flag} (or `{flag}` in the config file)")))
}

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).input(&path.display())
}

fn write_output(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).internal(&dir.display())?;
    }
    std::fs::write(path, contents).internal(&path.display())
}

fn parse_split(s: &str) -> Result<Split, CliError> {
    Split::parse(s).ok_or_else(|| CliError::Usage(format!("--split must be train, val or test, not {s:?}")))
}

/// Flags override config values; config values override defaults.
fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(jobs) = cli.jobs {
        cfg.jobs = jobs;
    }
    if let Some(backend) = cli.backend {
        cfg.backend = backend;
    }
    if let Some(dir) = &cli.out_dir {
        cfg.out_dir = dir.clone();
    }
    let set = |slot: &mut Option<PathBuf>, flag: &Option<PathBuf>| {
        if flag.is_some() {
            slot.clone_from(flag);
        }
    };
    let data = |cfg: &mut RunConfig, d: &DatasetArgs| {
        set(&mut cfg.warnings, &d.warnings);
        set(&mut cfg.splits, &d.splits);
        set(&mut cfg.features, &d.features);
    };
    match &cli.command {
        Command::Ingest { reports, labels, .. } => {
            if !reports.is_empty() {
                cfg.reports.clone_from(reports);
            }
            set(&mut cfg.labels, labels);
        }
        Command::Split { warnings, .. } => set(&mut cfg.warnings, warnings),
        Command::Featurize { warnings, metadata, .. } => {
            set(&mut cfg.warnings, warnings);
            set(&mut cfg.metadata, metadata);
        }
        Command::Train { data: d, recorded, .. } => {
            data(&mut cfg, d);
            set(&mut cfg.recorded, recorded);
        }
        Command::Evaluate { data: d, checkpoint, recorded, .. } => {
            data(&mut cfg, d);
            set(&mut cfg.checkpoint, checkpoint);
            set(&mut cfg.recorded, recorded);
        }
        Command::Triage { report, checkpoint, metadata, recorded, templates, .. } => {
            if let Some(r) = report {
                cfg.reports = vec![r.clone()];
            }
            set(&mut cfg.checkpoint, checkpoint);
            set(&mut cfg.metadata, metadata);
            set(&mut cfg.recorded, recorded);
            set(&mut cfg.templates, templates);
        }
        Command::FuzzValidate { warnings, recorded, templates, .. } => {
            set(&mut cfg.warnings, warnings);
            set(&mut cfg.recorded, recorded);
            set(&mut cfg.templates, templates);
        }
        Command::Importance { data: d, checkpoint, .. } => {
            data(&mut cfg, d);
            set(&mut cfg.checkpoint, checkpoint);
        }
        Command::Report { warnings, .. } => set(&mut cfg.warnings, warnings),
    }
    Ok(cfg)
}

/// Input files the command reads; all must exist before it starts.
fn inputs_of(cli: &Cli, cfg: &RunConfig) -> Vec<PathBuf> {
    let mut v: Vec<Option<PathBuf>> = vec![];
    let data = |v: &mut Vec<Option<PathBuf>>| v.extend([cfg.warnings.clone(), cfg.splits.clone(), cfg.features.clone()]);
    let recorded = if cfg.backend == BackendKind::Recorded { cfg.recorded.clone() } else { None };
    match &cli.command {
        Command::Ingest { .. } => {
            v.extend(cfg.reports.iter().cloned().map(Some));
            v.push(cfg.labels.clone());
        }
        Command::Split { .. } => v.push(cfg.warnings.clone()),
        Command::Featurize { .. } => v.extend([cfg.warnings.clone(), cfg.metadata.clone()]),
        Command::Train { .. } => {
            data(&mut v);
            v.push(recorded);
        }
        Command::Evaluate { .. } => {
            data(&mut v);
            v.extend([cfg.checkpoint.clone(), recorded]);
        }
        Command::Triage { .. } => {
            v.extend(cfg.reports.iter().cloned().map(Some));
            v.extend([cfg.checkpoint.clone(), cfg.metadata.clone(), recorded, cfg.templates.clone()]);
        }
        Command::FuzzValidate { .. } => v.extend([cfg.warnings.clone(), recorded, cfg.templates.clone()]),
        Command::Importance { .. } => {
            data(&mut v);
            v.push(cfg.checkpoint.clone());
        }
        Command::Report { verdicts, .. } => v.extend([verdicts.clone(), cfg.warnings.clone()]),
    }
    v.into_iter().flatten().collect()
}

pub(crate) fn run(cli: Cli, stdout: &mut (dyn Write + Send), stderr: &mut (dyn Write + Send)) -> Result<(), CliError> {
    let cfg = resolve(&cli)?;
    for path in inputs_of(&cli, &cfg) {
        if !path.exists() {
            return Err(CliError::Input(format!("input file {} does not exist", path.display())));
        }
    }
    writeln!(stdout, "config_digest={}", cfg.digest()).internal(&"stdout")?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.jobs).build().internal(&"thread pool")?;
    pool.install(|| dispatch(&cli.command, &cfg, stdout, stderr))
}

fn dispatch(command: &Command, cfg: &RunConfig, stdout: &mut (dyn Write + Send), stderr: &mut (dyn Write + Send)) -> Result<(), CliError> {
    let say = |out: &mut (dyn Write + Send), msg: String| writeln!(out, "{msg}").internal(&"stdout");
    match command {
        Command::Ingest { out, .. } => {
            if cfg.reports.is_empty() {
                return Err(CliError::Usage("missing required --report (or `reports` in the config file)".into()));
            }
            let mut records = load_reports(&cfg.reports)?;
            assign_clusters(&mut records, cfg.cluster_radius);
            let labeled = match &cfg.labels {
                Some(path) => {
                    let entries = read_labels(&read_text(path)?).input(&path.display())?;
                    attach_labels(&mut records, &entries).input(&path.display())?
                }
                None => 0,
            };
            let path = cfg.output(out, "warnings.jsonl");
            write_output(&path, write_warnings(&records).as_bytes())?;
            say(stdout, format!("ingested {} warnings ({labeled} labeled) -> {}", records.len(), path.display()))
        }
        Command::Split { out, .. } => {
            let records = load_warnings(cfg)?;
            let assignment = stratified_split(&records, cfg.split_ratios(), cfg.seed).input(&"split")?;
            let path = cfg.output(out, "splits.jsonl");
            write_output(&path, write_split_file(&assignment).as_bytes())?;
            say(stdout, format!("split {} warnings: train {} val {} test {} -> {}", records.len(), assignment.count(Split::Train), assignment.count(Split::Val), assignment.count(Split::Test), path.display()))
        }
        Command::Featurize { out, .. } => {
            let records = load_warnings(cfg)?;
            let vectors = featurize(&records, cfg)?;
            let path = cfg.output(out, "features.jsonl");
            write_output(&path, write_feature_sidecar(&vectors).as_bytes())?;
            say(stdout, format!("featurized {} warnings -> {}", vectors.len(), path.display()))
        }
        Command::Train { out, log, .. } => {
            let data = Data::load(cfg)?;
            let backend = make_backend(cfg, false, &[])?;
            let manifest = FeatureManifest::v1();
            let mut lines = String::new();
            let ckpt = train::<f64>(&manifest, &data.inputs(Split::Train)?, &data.inputs(Split::Val)?, &cfg.train_config(), &cfg.reward_spec(), backend.as_ref(), &mut |e| {
                let line = e.line();
                let _ = writeln!(stderr, "{line}");
                lines.push_str(&line);
                lines.push('\n');
            })
            .map_err(train_error)?;
            write_output(&cfg.output(log, "train.log"), lines.as_bytes())?;
            let path = cfg.output(out, "policy.ckpt");
            write_output(&path, &ckpt.to_bytes())?;
            say(stdout, format!("trained {} epochs, best epoch {} -> {}", ckpt.history.epochs.len(), ckpt.history.best_epoch, path.display()))
        }
        Command::Evaluate { split, no_fuzz, out, verdicts, .. } => {
            let split = parse_split(split)?;
            let data = Data::load(cfg)?;
            let ckpt = load_checkpoint(cfg)?;
            let backend = make_backend(cfg, false, &[])?;
            let (report, v) = evaluate_checkpoint(&ckpt, &data.inputs(split)?, backend.as_ref(), !no_fuzz).map_err(eval_error)?;
            let report_path = cfg.output(out, "eval_report.txt");
            write_output(&report_path, report.to_kv().as_bytes())?;
            write_output(&cfg.output(verdicts, "verdicts.jsonl"), write_verdicts(&v).as_bytes())?;
            say(stdout, format!("evaluated {} warnings on {split}: accuracy {:.4} f1 {} -> {}", report.n, report.accuracy, report.f1, report_path.display()))
        }
        Command::Triage { no_fuzz, out, .. } => {
            if cfg.reports.is_empty() {
                return Err(CliError::Usage("missing required --report (or `reports` in the config file)".into()));
            }
            let checkpoint = require(&cfg.checkpoint, "checkpoint")?;
            let mut records = load_reports(&cfg.reports)?;
            assign_clusters(&mut records, cfg.cluster_radius);
            let vectors = featurize(&records, cfg)?;
            let ckpt = PolicyCheckpoint::from_bytes_unverified(&std::fs::read(&checkpoint).input(&checkpoint.display())?).input(&checkpoint.display())?;
            // Unlabeled warnings give the simulated oracle nothing to draw from.
            let allow_fuzz = !no_fuzz && cfg.backend != BackendKind::Simulated;
            let backend = make_backend(cfg, true, &records)?;
            let inputs: Vec<WarningInput<'_>> =
                records.iter().zip(&vectors).map(|(r, v)| WarningInput { vector: v, label: r.label, record: Some(r) }).collect();
            let v = triage_with_checkpoint(&ckpt, &inputs, backend.as_ref(), allow_fuzz).map_err(eval_error)?;
            let path = cfg.output(out, "verdicts.jsonl");
            write_output(&path, write_verdicts(&v).as_bytes())?;
            let tp = v.iter().filter(|x| x.predicted == Label::TruePositive).count();
            say(stdout, format!("triaged {} warnings ({tp} true positive) -> {}", v.len(), path.display()))
        }
        Command::FuzzValidate { ids, out, .. } => {
            let records = load_warnings(cfg)?;
            let by_id: BTreeMap<WarningId, &WarningRecord> = records.iter().map(|r| (r.id, r)).collect();
            let wanted = ids.iter().map(|s| s.trim().parse::<WarningId>().map_err(|e| CliError::Usage(format!("--ids: {e}")))).collect::<Result<Vec<_>, _>>()?;
            let missing: Vec<String> = wanted.iter().filter(|id| !by_id.contains_key(id)).map(|id| id.to_string()).collect();
            if !missing.is_empty() {
                return Err(CliError::Input(format!("unknown warning id(s): {}", missing.join(", "))));
            }
            let selected: Vec<WarningRecord> = wanted.iter().map(|id| by_id[id].clone()).collect();
            let backend = make_backend(cfg, true, &selected)?;
            let mut rows = Vec::with_capacity(selected.len());
            for r in &selected {
                let outcome = backend.run(&FuzzRequest { id: r.id, label: r.label, record: Some(r) }, cfg.fuzz_budget_secs).input(&r.id)?;
                rows.push(RecordedOutcome { warning_id: r.id, kind: outcome.kind, elapsed: outcome.elapsed, detail: outcome.detail });
            }
            let path = cfg.output(out, "fuzz_outcomes.jsonl");
            write_output(&path, write_recorded(&rows).as_bytes())?;
            say(stdout, format!("validated {} warnings -> {}", rows.len(), path.display()))
        }
        Command::Importance { split, repeats, out, .. } => {
            let split = parse_split(split)?;
            if *repeats == 0 {
                return Err(CliError::Usage("--repeats must be at least 1".into()));
            }
            let data = Data::load(cfg)?;
            let ckpt = load_checkpoint(cfg)?;
            let backend = SimulatedBackend::new(cfg.sim_config()).input(&"simulated backend")?;
            let ranked = permutation_importance(&ckpt, &FeatureManifest::v1(), &data.inputs(split)?, &backend, *repeats, cfg.seed).map_err(eval_error)?;
            let mut text = String::from("rank\tfeature\tmean_delta\n");
            for (i, f) in ranked.iter().enumerate() {
                text.push_str(&format!("{}\t{}\t{}\n", i + 1, f.feature, f.mean_delta));
            }
            let path = cfg.output(out, "importance.tsv");
            write_output(&path, text.as_bytes())?;
            say(stdout, format!("ranked {} features -> {}", ranked.len(), path.display()))
        }
        Command::Report { verdicts, out, .. } => {
            let verdicts_path = require(verdicts, "verdicts")?;
            let v = read_verdicts(&read_text(&verdicts_path)?).input(&verdicts_path.display())?;
            let records = load_warnings(cfg)?;
            let labels: BTreeMap<WarningId, Option<Label>> = records.iter().map(|r| (r.id, r.label)).collect();
            let ordered = v
                .iter()
                .map(|x| labels.get(&x.warning_id).copied().flatten().ok_or_else(|| CliError::Input(format!("no label for warning {}", x.warning_id))))
                .collect::<Result<Vec<_>, _>>()?;
            let report = verdict_metrics(&v, &ordered).input(&verdicts_path.display())?;
            let path = cfg.output(out, "report.txt");
            write_output(&path, report.to_kv().as_bytes())?;
            say(stdout, format!("report over {} verdicts -> {}", report.n, path.display()))
        }
    }
}

fn load_reports(paths: &[PathBuf]) -> Result<Vec<WarningRecord>, CliError> {
    let mut records = vec![];
    for path in paths {
        let bytes = std::fs::read(path).input(&path.display())?;
        records.extend(parse_report(&bytes).input(&path.display())?);
    }
    Ok(records)
}

fn load_warnings(cfg: &RunConfig) -> Result<Vec<WarningRecord>, CliError> {
    let path = require(&cfg.warnings, "warnings")?;
    read_warnings(&read_text(&path)?).input(&path.display())
}

fn load_checkpoint(cfg: &RunConfig) -> Result<PolicyCheckpoint, CliError> {
    let path = require(&cfg.checkpoint, "checkpoint")?;
    let bytes = std::fs::read(&path).input(&path.display())?;
    PolicyCheckpoint::from_bytes_unverified(&bytes).input(&path.display())
}

fn featurize(records: &[WarningRecord], cfg: &RunConfig) -> Result<Vec<FeatureVector>, CliError> {
    let metadata: BTreeMap<String, PackageMetadata> = match &cfg.metadata {
        Some(path) => read_package_metadata(&read_text(path)?).input(&path.display())?.into_iter().map(|m| (m.name.clone(), m)).collect(),
        None => BTreeMap::new(),
    };
    let manifest = FeatureManifest::v1();
    let sizes = cluster_sizes(records);
    records
        .iter()
        .zip(sizes)
        .map(|(r, size)| extract_features(&manifest, r, metadata.get(r.package_name()), size, ExtractionMode::Heuristic).input(&r.id))
        .collect()
}

fn make_backend(cfg: &RunConfig, allow_external: bool, _records: &[WarningRecord]) -> Result<Box<dyn FuzzBackend>, CliError> {
    Ok(match cfg.backend {
        BackendKind::Simulated => Box::new(SimulatedBackend::new(cfg.sim_config()).input(&"simulated backend")?),
        BackendKind::Recorded => {
            let path = require(&cfg.recorded, "recorded")?;
            Box::new(RecordedBackend::parse(&read_text(&path)?).input(&path.display())?)
        }
        BackendKind::External if !allow_external => {
            return Err(CliError::Usage("training and evaluation use the simulated or recorded backend".into()));
        }
        BackendKind::External => {
            let templates = match &cfg.templates {
                Some(dir) => TemplateSet::load_dir(dir).input(&dir.display())?,
                None => TemplateSet::builtin(),
            };
            Box::new(ExternalBackend::new(cfg.fuzz_cmd.clone(), cfg.out_dir.join("harnesses"), templates, cfg.fuzz_pool_size).input(&"external backend")?)
        }
    })
}

/// Labeled warnings with their split assignment and raw feature vectors.
struct Data {
    records: Vec<WarningRecord>,
    splits: SplitAssignment,
    features: BTreeMap<WarningId, FeatureVector>,
}

impl Data {
    fn load(cfg: &RunConfig) -> Result<Self, CliError> {
        let records = load_warnings(cfg)?;
        let splits_path = require(&cfg.splits, "splits")?;
        let splits = read_split_file(&read_text(&splits_path)?).input(&splits_path.display())?;
        let features_path = require(&cfg.features, "features")?;
        let features = read_feature_sidecar(&read_text(&features_path)?).input(&features_path.display())?.into_iter().map(|v| (v.warning_id, v)).collect();
        Ok(Self { records, splits, features })
    }

    fn inputs(&self, split: Split) -> Result<Vec<WarningInput<'_>>, CliError> {
        self.splits
            .select(&self.records, split)
            .into_iter()
            .map(|r| {
                let vector = self.features.get(&r.id).ok_or_else(|| CliError::Input(format!("no features for warning {}", r.id)))?;
                Ok(WarningInput { vector, label: r.label, record: Some(r) })
            })
            .collect()
    }
}
