//! Adapter that runs an external fuzzing command on a generated harness.
//!
//! The command is invoked as `<cmd> <harness-path> --budget <seconds>` and
//! killed once it exceeds the budget plus a grace period. Failures to set
//! up or run the process never surface as errors; they become
//! `InfrastructureFailure` outcomes.

use std::io::Read;
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

use regex::Regex;
use wait_timeout::ChildExt;

use super::harness::{generate_harness, TemplateSet};
use super::outcome::{FuzzBackend, FuzzError, FuzzOutcome, FuzzOutcomeKind, FuzzRequest};

/// Environment variable that overrides the configured fuzz command.
pub const FUZZ_CMD_ENV: &str = "TRIAGE_FUZZ_CMD";

pub const MIN_BUDGET_SECS: f64 = 30.0;
pub const MAX_BUDGET_SECS: f64 = 60.0;
pub const GRACE_SECS: f64 = 5.0;

/// Output patterns that classify a finished run.
#[derive(Debug, Clone)]
pub struct OutcomeMarkers {
    pub sanitizer: Regex,
    pub crash: Regex,
    pub build_failure: Regex,
}

impl Default for OutcomeMarkers {
    fn default() -> Self {
        Self {
            sanitizer: Regex::new(r"(?m)(ERROR: (Address|Memory|Thread|Leak|UndefinedBehavior)Sanitizer|SUMMARY: \w+Sanitizer)").unwrap(),
            crash: Regex::new(r"(?m)(deadly signal|panicked at|ERROR: libFuzzer|SEGV|Test unit written to|crash-[0-9a-f]+)").unwrap(),
            build_failure: Regex::new(r"(?m)(could not compile|error\[E\d{4}\]|error: failed to (build|run|compile|load)|linker .* not found)").unwrap(),
        }
    }
}

impl OutcomeMarkers {
    /// Classifies a finished process: exit 0 is clean; then sanitizer
    /// marker, crash marker, build failure, in that order; anything else is
    /// inconclusive.
    pub fn classify(&self, exit_code: Option<i32>, output: &str) -> (FuzzOutcomeKind, String) {
        if exit_code == Some(0) {
            return (FuzzOutcomeKind::Clean, "exit 0".into());
        }
        let first = |re: &Regex| re.find(output).map(|m| m.as_str().to_string()).unwrap_or_default();
        if self.sanitizer.is_match(output) {
            (FuzzOutcomeKind::SanitizerViolation, first(&self.sanitizer))
        } else if self.crash.is_match(output) {
            (FuzzOutcomeKind::Crash, first(&self.crash))
        } else if self.build_failure.is_match(output) {
            (FuzzOutcomeKind::InfrastructureFailure, format!("build failure: {}", first(&self.build_failure)))
        } else {
            let code = exit_code.map_or_else(|| "signal".to_string(), |c| format!("exit {c}"));
            (FuzzOutcomeKind::Inconclusive, code)
        }
    }
}

/// Counting semaphore bounding concurrent child processes.
#[derive(Debug)]
struct Pool {
    free: Mutex<usize>,
    cv: Condvar,
}

impl Pool {
    fn new(size: usize) -> Self {
        Self { free: Mutex::new(size.max(1)), cv: Condvar::new() }
    }

    fn acquire(&self) -> PoolGuard<'_> {
        let mut free = self.free.lock().unwrap_or_else(|e| e.into_inner());
        while *free == 0 {
            free = self.cv.wait(free).unwrap_or_else(|e| e.into_inner());
        }
        *free -= 1;
        PoolGuard(self)
    }
}

struct PoolGuard<'a>(&'a Pool);

impl Drop for PoolGuard<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().unwrap_or_else(|e| e.into_inner()) += 1;
        self.0.cv.notify_one();
    }
}

#[derive(Debug)]
pub struct ExternalBackend {
    /// Program followed by fixed leading arguments, whitespace separated.
    pub command: String,
    /// Directory harness files are written to.
    pub work_dir: PathBuf,
    pub templates: TemplateSet,
    pub markers: OutcomeMarkers,
    budget_bounds: (f64, f64),
    grace: f64,
    pool: Pool,
}

impl ExternalBackend {
    /// `configured` is used unless `TRIAGE_FUZZ_CMD` is set.
    pub fn new(configured: Option<String>, work_dir: PathBuf, templates: TemplateSet, pool_size: usize) -> Result<Self, FuzzError> {
        let command = std::env::var(FUZZ_CMD_ENV)
            .ok()
            .filter(|c| !c.trim().is_empty())
            .or(configured)
            .ok_or_else(|| FuzzError::Config(format!("no fuzz command configured and {FUZZ_CMD_ENV} unset")))?;
        Ok(Self {
            command,
            work_dir,
            templates,
            markers: OutcomeMarkers::default(),
            budget_bounds: (MIN_BUDGET_SECS, MAX_BUDGET_SECS),
            grace: GRACE_SECS,
            pool: Pool::new(pool_size),
        })
    }

    /// Budget actually passed to the command.
    pub fn clamp_budget(&self, budget_secs: f64) -> f64 {
        let (lo, hi) = self.budget_bounds;
        if budget_secs.is_nan() {
            lo
        } else {
            budget_secs.clamp(lo, hi)
        }
    }

    #[cfg(test)]
    fn with_timing(mut self, bounds: (f64, f64), grace: f64) -> Self {
        self.budget_bounds = bounds;
        self.grace = grace;
        self
    }

    fn execute(&self, request: &FuzzRequest<'_>, budget: f64) -> FuzzOutcome {
        let Some(record) = request.record else {
            return FuzzOutcome::infrastructure(format!("warning {} has no record to build a harness from", request.id));
        };
        let harness = match generate_harness(record, &self.templates) {
            Ok(h) => h,
            Err(e) => return FuzzOutcome::infrastructure(format!("harness generation: {e}")),
        };
        if let Err(e) = std::fs::create_dir_all(&self.work_dir) {
            return FuzzOutcome::infrastructure(format!("work dir: {e}"));
        }
        let path = self.work_dir.join(format!("harness_{}.rs", request.id));
        if let Err(e) = std::fs::write(&path, harness) {
            return FuzzOutcome::infrastructure(format!("write harness: {e}"));
        }

        let mut parts = self.command.split_whitespace();
        let Some(program) = parts.next() else {
            return FuzzOutcome::infrastructure("empty fuzz command");
        };
        let _slot = self.pool.acquire();
        let start = Instant::now();
        let spawned = Command::new(program)
            .args(parts)
            .arg(&path)
            .arg("--budget")
            .arg(format!("{}", budget.round() as u64))
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn();
        let mut child = match spawned {
            Ok(c) => c,
            Err(e) => return FuzzOutcome::infrastructure(format!("spawn {program}: {e}")),
        };
        let readers: Vec<_> = [child.stdout.take().map(|s| Box::new(s) as Box<dyn Read + Send>), child.stderr.take().map(|s| Box::new(s) as Box<dyn Read + Send>)]
            .into_iter()
            .flatten()
            .map(|mut pipe| {
                std::thread::spawn(move || {
                    let mut buf = Vec::new();
                    let _ = pipe.read_to_end(&mut buf);
                    String::from_utf8_lossy(&buf).into_owned()
                })
            })
            .collect();

        let limit = Duration::from_secs_f64(budget + self.grace);
        let status = match child.wait_timeout(limit) {
            Ok(Some(status)) => Some(status),
            Ok(None) => {
                let _ = child.kill();
                let _ = child.wait();
                None
            }
            Err(e) => {
                let _ = child.kill();
                let _ = child.wait();
                return FuzzOutcome::infrastructure(format!("wait: {e}"));
            }
        };
        let output: String = readers.into_iter().map(|h| h.join().unwrap_or_default()).collect::<Vec<_>>().join("\n");
        let elapsed = start.elapsed().as_secs_f64();
        match status {
            None => FuzzOutcome::new(FuzzOutcomeKind::Inconclusive, elapsed.min(budget + self.grace), "timeout"),
            Some(status) => {
                let (kind, detail) = self.markers.classify(status.code(), &output);
                FuzzOutcome::new(kind, elapsed, detail)
            }
        }
    }
}

impl FuzzBackend for ExternalBackend {
    fn run(&self, request: &FuzzRequest<'_>, budget_secs: f64) -> Result<FuzzOutcome, FuzzError> {
        Ok(self.execute(request, self.clamp_budget(budget_secs)))
    }
}

#[cfg(all(test, unix))]
mod tests {
    use super::*;
    use crate::warning_store::{Level, Span, WarningRecord};
    use std::os::unix::fs::PermissionsExt;

    fn record() -> WarningRecord {
        let span = Span { start_line: 1, start_col: 1, end_line: 3, end_col: 1 };
        WarningRecord::new(
            Level::Warning,
            "UnsafeDataflow",
            None,
            "Potential unsafe dataflow issue in `unsafe_retain`",
            "demo-0.1.0/src/lib.rs",
            span,
            "fn unsafe_retain(v: &mut Vec<u8>) { unsafe { v.set_len(0); } v.retain(|x| *x > 0); }",
        )
    }

    fn script(dir: &std::path::Path, body: &str) -> String {
        let path = dir.join("fuzz.sh");
        std::fs::write(&path, format!("#!/bin/sh\n{body}\n")).unwrap();
        std::fs::set_permissions(&path, std::fs::Permissions::from_mode(0o755)).unwrap();
        path.display().to_string()
    }

    fn backend(dir: &std::path::Path, body: &str) -> ExternalBackend {
        ExternalBackend::new(Some(script(dir, body)), dir.join("work"), TemplateSet::builtin(), 2).unwrap()
    }

    fn run(b: &ExternalBackend, budget: f64) -> FuzzOutcome {
        let r = record();
        b.run(&FuzzRequest { id: r.id, label: None, record: Some(&r) }, budget).unwrap()
    }

    #[test]
    fn classifies_exit_status_and_markers() {
        let dir = tempfile::tempdir().unwrap();
        let cases = [
            ("exit 0", FuzzOutcomeKind::Clean),
            ("echo '==12==ERROR: AddressSanitizer: heap-use-after-free' >&2; exit 1", FuzzOutcomeKind::SanitizerViolation),
            ("echo 'thread main panicked at src/lib.rs'; exit 77", FuzzOutcomeKind::Crash),
            ("echo 'error: could not compile `demo`' >&2; exit 101", FuzzOutcomeKind::InfrastructureFailure),
            ("exit 3", FuzzOutcomeKind::Inconclusive),
        ];
        for (body, kind) in cases {
            let out = run(&backend(dir.path(), body), 30.0);
            assert_eq!(out.kind, kind, "{body}: {}", out.detail);
            assert!(out.elapsed >= 0.0);
        }
    }

    #[test]
    fn passes_harness_path_and_clamped_budget() {
        let dir = tempfile::tempdir().unwrap();
        let log = dir.path().join("args.txt");
        let b = backend(dir.path(), &format!("echo \"$@\" > {}; grep -q unsafe_retain \"$1\" || exit 9", log.display()));
        assert_eq!(b.clamp_budget(5.0), 30.0);
        assert_eq!(b.clamp_budget(120.0), 60.0);
        assert_eq!(b.clamp_budget(45.0), 45.0);
        let out = run(&b, 5.0);
        assert_eq!(out.kind, FuzzOutcomeKind::Clean, "{}", out.detail);
        let args = std::fs::read_to_string(&log).unwrap();
        assert!(args.contains("harness_"));
        assert!(args.trim_end().ends_with("--budget 30"), "{args}");
    }

    #[test]
    fn timeout_kills_and_reports_inconclusive() {
        let dir = tempfile::tempdir().unwrap();
        let b = backend(dir.path(), "exec sleep 30").with_timing((0.2, 0.2), 0.3);
        let start = Instant::now();
        let out = run(&b, 10.0);
        assert!(start.elapsed() < Duration::from_secs(5));
        assert_eq!(out.kind, FuzzOutcomeKind::Inconclusive);
        assert_eq!(out.detail, "timeout");
        assert!(out.elapsed <= 0.2 + 0.3 + 1e-9);
    }

    #[test]
    fn setup_failures_are_infrastructure() {
        let dir = tempfile::tempdir().unwrap();
        let b = ExternalBackend::new(Some("/nonexistent/fuzzer".into()), dir.path().into(), TemplateSet::builtin(), 1).unwrap();
        assert_eq!(run(&b, 30.0).kind, FuzzOutcomeKind::InfrastructureFailure);
        let no_record = b.run(&FuzzRequest { id: crate::warning_store::WarningId(1), label: None, record: None }, 30.0).unwrap();
        assert_eq!(no_record.kind, FuzzOutcomeKind::InfrastructureFailure);
    }

    #[test]
    fn marker_order() {
        let m = OutcomeMarkers::default();
        assert_eq!(m.classify(Some(0), "SUMMARY: AddressSanitizer").0, FuzzOutcomeKind::Clean);
        assert_eq!(m.classify(None, "deadly signal").0, FuzzOutcomeKind::Crash);
        assert_eq!(m.classify(Some(1), "").0, FuzzOutcomeKind::Inconclusive);
    }
}
