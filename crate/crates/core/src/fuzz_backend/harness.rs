//! Pattern-specific fuzz harness templates.
//!
//! Templates are plain text with `{{package}}`, `{{function}}`,
//! `{{type_args}}` and `{{entry}}` placeholders. The built-in set targets
//! libFuzzer via `libfuzzer-sys`; a templates directory with one
//! `<pattern>.rs.tmpl` file per bug pattern replaces it.

use std::collections::BTreeMap;
use std::path::Path;

use regex::Regex;

use crate::featurizer::SnippetStats;
use crate::warning_store::{bug_pattern, BugPattern, WarningRecord};

const PANIC_SAFETY: &str = r#"// Panic-safety harness for {{package}}::{{function}}.
// The supplied closure panics on a fuzzer-chosen call while the target may
// hold a temporarily broken invariant; sanitizers catch the fallout.
#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if data.is_empty() {
        return;
    }
    let panic_at = data[0] as usize;
    let mut input: Vec<u8> = data[1..].to_vec();
    let mut calls = 0usize;
    let _ = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| {
        {{entry}}{{type_args}}(&mut input, |_item: &u8| {
            calls += 1;
            if calls == panic_at {
                panic!("harness: injected panic on call {}", calls);
            }
            true
        });
    }));
    drop(input);
});
"#;

const HIGHER_ORDER_INVARIANT: &str = r#"// Higher-order invariant harness for {{package}}::{{function}}.
// The element type answers the same question differently on every call.
#![no_main]
use libfuzzer_sys::fuzz_target;
use std::cell::Cell;
use std::cmp::Ordering;

#[derive(Debug)]
struct Inconsistent {
    value: u8,
    calls: Cell<u32>,
}

impl Inconsistent {
    fn tick(&self) -> u32 {
        let n = self.calls.get().wrapping_add(1);
        self.calls.set(n);
        n
    }
}

impl Clone for Inconsistent {
    fn clone(&self) -> Self {
        Self { value: self.value.wrapping_add(self.tick() as u8), calls: Cell::new(0) }
    }
}

impl PartialEq for Inconsistent {
    fn eq(&self, _other: &Self) -> bool {
        self.tick() % 2 == 0
    }
}

impl PartialOrd for Inconsistent {
    fn partial_cmp(&self, _other: &Self) -> Option<Ordering> {
        Some(if self.tick() % 3 == 0 { Ordering::Less } else { Ordering::Greater })
    }
}

impl std::borrow::Borrow<[u8]> for Inconsistent {
    fn borrow(&self) -> &[u8] {
        // Length changes between calls.
        const BYTES: [u8; 64] = [0xAA; 64];
        &BYTES[..(self.tick() as usize % 64)]
    }
}

fuzz_target!(|data: &[u8]| {
    let items: Vec<Inconsistent> = data
        .iter()
        .map(|&value| Inconsistent { value, calls: Cell::new(0) })
        .collect();
    let _ = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| {
        let _ = {{entry}}{{type_args}}(items);
    }));
});
"#;

const SEND_SYNC_VARIANCE: &str = r#"// Send/Sync variance harness for {{package}}::{{function}}.
// Two threads share one instance wrapping a thread-unsafe payload.
#![no_main]
use libfuzzer_sys::fuzz_target;
use std::rc::Rc;
use std::sync::Arc;

fuzz_target!(|data: &[u8]| {
    let rounds = data.first().copied().unwrap_or(1) as usize + 1;
    let shared = Arc::new({{entry}}{{type_args}}::new(Rc::new(data.to_vec())));
    let workers: Vec<_> = (0..2)
        .map(|_| {
            let shared = Arc::clone(&shared);
            std::thread::spawn(move || {
                for _ in 0..rounds {
                    let _ = &*shared;
                }
            })
        })
        .collect();
    for w in workers {
        let _ = w.join();
    }
});
"#;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HarnessError {
    #[error("no harness template for bug pattern {0:?}")]
    UnknownPattern(BugPattern),
    #[error("cannot recover a callable entry point for warning {0}")]
    UnresolvableTarget(String),
    #[error("template leaves placeholder {0} unresolved")]
    UnresolvedPlaceholder(String),
    #[error("cannot read template {path}: {message}")]
    Io { path: String, message: String },
}

/// A bug pattern and its template text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HarnessTemplate {
    pub bug_pattern: BugPattern,
    pub text: String,
}

/// Values substituted into a template.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HarnessBindings {
    pub package: String,
    pub function: String,
    pub type_args: String,
    pub entry: String,
}

impl HarnessTemplate {
    pub fn render(&self, b: &HarnessBindings) -> Result<String, HarnessError> {
        let out = self
            .text
            .replace("{{package}}", &b.package)
            .replace("{{function}}", &b.function)
            .replace("{{type_args}}", &b.type_args)
            .replace("{{entry}}", &b.entry);
        if let Some(pos) = out.find("{{") {
            let rest = &out[pos..];
            let end = rest.find("}}").map_or(rest.len().min(32), |e| e + 2);
            return Err(HarnessError::UnresolvedPlaceholder(rest[..end].to_string()));
        }
        Ok(out)
    }
}

/// One template per fuzzable bug pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateSet {
    templates: BTreeMap<BugPattern, HarnessTemplate>,
}

impl Default for TemplateSet {
    fn default() -> Self {
        Self::builtin()
    }
}

impl TemplateSet {
    pub fn builtin() -> Self {
        let templates = [
            (BugPattern::PanicSafety, PANIC_SAFETY),
            (BugPattern::HigherOrderInvariant, HIGHER_ORDER_INVARIANT),
            (BugPattern::SendSyncVariance, SEND_SYNC_VARIANCE),
        ]
        .into_iter()
        .map(|(p, t)| (p, HarnessTemplate { bug_pattern: p, text: t.to_string() }))
        .collect();
        Self { templates }
    }

    /// File name a pattern's template is read from.
    pub fn file_name(pattern: BugPattern) -> String {
        format!("{}.rs.tmpl", pattern.as_str())
    }

    /// Loads `<pattern>.rs.tmpl` files from `dir`; missing files fall back to the built-ins.
    pub fn load_dir(dir: &Path) -> Result<Self, HarnessError> {
        let mut set = Self::builtin();
        for pattern in [BugPattern::PanicSafety, BugPattern::HigherOrderInvariant, BugPattern::SendSyncVariance] {
            let path = dir.join(Self::file_name(pattern));
            if path.exists() {
                let text = std::fs::read_to_string(&path).map_err(|e| HarnessError::Io {
                    path: path.display().to_string(),
                    message: e.to_string(),
                })?;
                set.templates.insert(pattern, HarnessTemplate { bug_pattern: pattern, text });
            }
        }
        Ok(set)
    }

    pub fn get(&self, pattern: BugPattern) -> Option<&HarnessTemplate> {
        self.templates.get(&pattern)
    }

    pub fn iter(&self) -> impl Iterator<Item = &HarnessTemplate> {
        self.templates.values()
    }
}

/// Recovers the harness bindings for a warning from its description and snippet.
pub fn harness_bindings(record: &WarningRecord, pattern: BugPattern) -> Result<HarnessBindings, HarnessError> {
    let package = record.package_name().replace('-', "_");
    let fn_name = described_target(&record.description).or_else(|| snippet_fn_name(&record.code_snippet));
    let type_name = snippet_type_name(&record.code_snippet);
    let unresolvable = || HarnessError::UnresolvableTarget(record.id.to_string());

    let (function, path) = match pattern {
        BugPattern::SendSyncVariance => {
            let ty = type_name.or(fn_name).ok_or_else(unresolvable)?;
            (ty.clone(), ty)
        }
        _ => match (fn_name, type_name) {
            (Some(f), _) => (f.clone(), f),
            (None, Some(ty)) if record.code_snippet.contains("Drop") => ("drop".to_string(), format!("{ty}::drop")),
            _ => return Err(unresolvable()),
        },
    };

    let generic_count = SnippetStats::analyze(&record.code_snippet).generic_params;
    let arg = if pattern == BugPattern::SendSyncVariance { "Rc<Vec<u8>>" } else { "Vec<u8>" };
    let type_args = if generic_count == 0 {
        String::new()
    } else {
        format!("::<{}>", vec![arg; generic_count].join(", "))
    };
    Ok(HarnessBindings { entry: format!("{package}::{path}"), package, function, type_args })
}

/// Renders the pattern-specific harness for a warning.
pub fn generate_harness(record: &WarningRecord, templates: &TemplateSet) -> Result<String, HarnessError> {
    let pattern = bug_pattern(record);
    let template = templates.get(pattern).ok_or(HarnessError::UnknownPattern(pattern))?;
    let bindings = harness_bindings(record, pattern)?;
    template.render(&bindings)
}

fn ident_re() -> Regex {
    Regex::new(r"[A-Za-z_][A-Za-z0-9_]*").unwrap()
}

/// Last path segment of the first backtick-quoted name in the description.
fn described_target(description: &str) -> Option<String> {
    let start = description.find('`')? + 1;
    let len = description[start..].find('`')?;
    let quoted = &description[start..start + len];
    let head = quoted.split(['(', '<']).next().unwrap_or("");
    let last = head.rsplit("::").next().unwrap_or("");
    ident_re().find(last).filter(|m| m.start() == 0 && m.end() == last.len()).map(|m| m.as_str().to_string())
}

fn snippet_fn_name(snippet: &str) -> Option<String> {
    let re = Regex::new(r"\bfn\s+([A-Za-z_][A-Za-z0-9_]*)").unwrap();
    re.captures(snippet).map(|c| c[1].to_string())
}

/// Self type of the first `impl` block, or the first declared struct/enum.
fn snippet_type_name(snippet: &str) -> Option<String> {
    let impl_for = Regex::new(r"\bimpl\b(?:\s*<[^{]*?>)?[^{;]*?\bfor\s+([A-Za-z_][A-Za-z0-9_]*)").unwrap();
    if let Some(c) = impl_for.captures(snippet) {
        return Some(c[1].to_string());
    }
    let inherent = Regex::new(r"\bimpl\b(?:\s*<[^{]*?>)?\s*([A-Za-z_][A-Za-z0-9_]*)").unwrap();
    if let Some(c) = inherent.captures(snippet) {
        return Some(c[1].to_string());
    }
    let decl = Regex::new(r"\b(?:struct|enum|union)\s+([A-Za-z_][A-Za-z0-9_]*)").unwrap();
    decl.captures(snippet).map(|c| c[1].to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::warning_store::{Level, Span};

    fn rec(analyzer: &str, description: &str, snippet: &str) -> WarningRecord {
        let span = Span { start_line: 1, start_col: 1, end_line: 8, end_col: 1 };
        WarningRecord::new(Level::Warning, analyzer, None, description, "demo-1.2.0/src/lib.rs", span, snippet)
    }

    const RETAIN: &str = "fn unsafe_retain(v: &mut Vec<u8>) {\n    let len = v.len();\n    unsafe { v.set_len(0); }\n    v.retain(|x| *x > 0);\n    unsafe { v.set_len(len); }\n}";

    #[test]
    fn panic_safety_harness_embeds_target() {
        let r = rec("UnsafeDataflow", "Potential unsafe dataflow issue in `unsafe_retain`", RETAIN);
        let h = generate_harness(&r, &TemplateSet::builtin()).unwrap();
        assert!(h.contains("unsafe_retain"));
        assert!(h.contains("demo::unsafe_retain"));
        assert!(h.contains("if calls == panic_at"));
        assert!(h.contains("panic!("));
        assert!(!h.contains("{{"));
    }

    #[test]
    fn function_from_snippet_when_description_is_silent() {
        let r = rec("UnsafeDataflow", "unsafe dataflow", RETAIN);
        let b = harness_bindings(&r, BugPattern::PanicSafety).unwrap();
        assert_eq!(b.function, "unsafe_retain");
        assert_eq!(b.type_args, "");
    }

    #[test]
    fn send_sync_harness_spawns_threads() {
        let r = rec("SendSyncVariance", "Suspicious impl of `Send` for `Guard`", "unsafe impl<T, U> Send for Guard<T, U> {}");
        let h = generate_harness(&r, &TemplateSet::builtin()).unwrap();
        assert!(h.contains("demo::Guard::<Rc<Vec<u8>>, Rc<Vec<u8>>>::new"));
        assert!(h.contains("std::thread::spawn"));
        assert!(!h.contains("{{"));
    }

    #[test]
    fn drop_impl_targets_destructor() {
        let r = rec("UnsafeDestructor", "unsafe block detected in drop", "impl<T: 'static> Drop for Arc<T> {...} }");
        let h = generate_harness(&r, &TemplateSet::builtin()).unwrap();
        assert!(h.contains("demo::Arc::drop::<Vec<u8>>"));
        assert!(h.contains("impl PartialEq for Inconsistent"));
    }

    #[test]
    fn unknown_and_unresolvable() {
        let r = rec("UnsafeDataflow", "something", "let x = 1;");
        assert_eq!(generate_harness(&r, &TemplateSet::builtin()), Err(HarnessError::UnknownPattern(BugPattern::Unknown)));
        let r = rec("UnsafeDataflow", "no target", "unsafe { v.set_len(0) }");
        assert!(matches!(generate_harness(&r, &TemplateSet::builtin()), Err(HarnessError::UnresolvableTarget(_))));
    }

    #[test]
    fn render_rejects_unbound_placeholders() {
        let t = HarnessTemplate { bug_pattern: BugPattern::PanicSafety, text: "{{entry}}({{extra}})".into() };
        let b = HarnessBindings { package: "p".into(), function: "f".into(), type_args: String::new(), entry: "p::f".into() };
        assert_eq!(t.render(&b), Err(HarnessError::UnresolvedPlaceholder("{{extra}}".into())));
        for t in TemplateSet::builtin().iter() {
            assert!(!t.render(&b).unwrap().contains("{{"));
        }
    }

    #[test]
    fn templates_load_from_dir() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("panic_safety.rs.tmpl"), "custom {{function}}").unwrap();
        let set = TemplateSet::load_dir(dir.path()).unwrap();
        let r = rec("UnsafeDataflow", "in `unsafe_retain`", RETAIN);
        assert_eq!(generate_harness(&r, &set).unwrap(), "custom unsafe_retain");
        assert_eq!(set.get(BugPattern::SendSyncVariance), TemplateSet::builtin().get(BugPattern::SendSyncVariance));
    }
}
