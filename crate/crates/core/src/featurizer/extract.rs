use serde::{Deserialize, Serialize};

use super::lexical::SnippetStats;
use super::manifest::{FeatureKind, FeatureManifest, ManifestDigest};
use crate::warning_store::{bug_pattern, BugPattern, Level, WarningId, WarningRecord};

/// Largest snippet the lexical extractor accepts.
pub const MAX_SNIPPET_BYTES: usize = 1 << 20;

/// Neutral value for ratio features whose inputs are missing.
pub const IMPUTED_RATIO: f64 = 0.5;

/// Package-level context for a warning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackageMetadata {
    pub name: String,
    pub download_count: u64,
    /// Unsafe blocks over all blocks in the package.
    pub unsafe_prevalence: f64,
    pub total_loc: u64,
}

impl PackageMetadata {
    pub fn validate(&self) -> Result<(), FeatureError> {
        if !(0.0..=1.0).contains(&self.unsafe_prevalence) {
            return Err(FeatureError::InvalidMetadata(format!(
                "package {}: unsafe_prevalence {} outside [0, 1]",
                self.name, self.unsafe_prevalence
            )));
        }
        Ok(())
    }
}

/// A warning's features in manifest order. Also the feature-sidecar row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub warning_id: WarningId,
    pub manifest_digest: ManifestDigest,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FeatureError {
    #[error("manifest digest mismatch: expected {expected}, found {found}")]
    DigestMismatch { expected: ManifestDigest, found: ManifestDigest },
    #[error("snippet of warning {id} is {bytes} bytes (limit {MAX_SNIPPET_BYTES})")]
    SnippetTooLarge { id: WarningId, bytes: usize },
    #[error("feature vector has {found} values, manifest has {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("feature {name} (slot {index}) = {value}: {reason}")]
    InvalidValue { index: usize, name: &'static str, value: f64, reason: &'static str },
    #[error("invalid package metadata: {0}")]
    InvalidMetadata(String),
    #[error("no features for warning {0}")]
    MissingVector(WarningId),
}

/// How feature values are obtained.
#[derive(Debug, Clone, Copy)]
pub enum ExtractionMode<'a> {
    /// Lexical approximations from the snippet plus record and package data.
    Heuristic,
    /// Exact values from an external producer, passed through after validation.
    Precomputed(&'a FeatureVector),
}

/// Checks the value-domain invariants of every slot.
pub fn validate_values(manifest: &FeatureManifest, values: &[f64]) -> Result<(), FeatureError> {
    if values.len() != manifest.len() {
        return Err(FeatureError::LengthMismatch { expected: manifest.len(), found: values.len() });
    }
    for (index, (e, &value)) in manifest.entries.iter().zip(values).enumerate() {
        let bad = |reason| Err(FeatureError::InvalidValue { index, name: e.name, value, reason });
        if !value.is_finite() {
            return bad("not finite");
        }
        match e.kind {
            FeatureKind::Flag | FeatureKind::CategoricalOneHot if value != 0.0 && value != 1.0 => {
                return bad("flags must be 0 or 1")
            }
            FeatureKind::Ratio if !(0.0..=1.0).contains(&value) => return bad("ratios must lie in [0, 1]"),
            FeatureKind::Count | FeatureKind::LogScaled if value < 0.0 => return bad("must be non-negative"),
            _ => {}
        }
    }
    Ok(())
}

pub fn extract_features(
    manifest: &FeatureManifest,
    record: &WarningRecord,
    meta: Option<&PackageMetadata>,
    cluster_size: usize,
    mode: ExtractionMode<'_>,
) -> Result<FeatureVector, FeatureError> {
    let values = match mode {
        ExtractionMode::Precomputed(v) => {
            if v.manifest_digest != manifest.digest {
                return Err(FeatureError::DigestMismatch { expected: manifest.digest, found: v.manifest_digest });
            }
            validate_values(manifest, &v.values)?;
            v.values.clone()
        }
        ExtractionMode::Heuristic => {
            let v1 = FeatureManifest::v1();
            if manifest.digest != v1.digest {
                return Err(FeatureError::DigestMismatch { expected: v1.digest, found: manifest.digest });
            }
            if record.code_snippet.len() > MAX_SNIPPET_BYTES {
                return Err(FeatureError::SnippetTooLarge { id: record.id, bytes: record.code_snippet.len() });
            }
            if let Some(m) = meta {
                m.validate()?;
            }
            let slots = heuristic_slots(record, meta, cluster_size);
            debug_assert!(slots.names.iter().copied().eq(manifest.names()), "heuristic slot order drifted from manifest");
            let values = slots.values;
            validate_values(manifest, &values)?;
            values
        }
    };
    Ok(FeatureVector { warning_id: record.id, manifest_digest: manifest.digest, values })
}

fn log1p10(x: f64) -> f64 {
    (1.0 + x).log10()
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

struct Slots {
    names: Vec<&'static str>,
    values: Vec<f64>,
}

impl Slots {
    fn push(&mut self, name: &'static str, v: f64) {
        self.names.push(name);
        self.values.push(v);
    }
}

/// Heuristic rules, one per slot, in v1 manifest order:
///
/// * cyclomatic complexity = 1 + `if`/`match`/`while`/`for`/`loop` keywords
///   (0 for an empty snippet); `for` inside an `impl` header or `for<` is not a loop.
/// * panic paths = `panic`/`unwrap`/`expect`/`assert*`/`unreachable` tokens.
/// * borrow ratio = `&` sigils over identifier tokens, clamped to 1.
/// * bypass-to-danger distance = snippet lines from the first lifetime-bypass
///   call to the nearest later call that may run caller code; 0 if absent.
/// * downloads and package size are `log10(1 + n)`.
/// * missing package metadata or an empty snippet set ratios to 0.5, counts
///   and flags to 0, and raise the matching `*_imputed` flag.
fn heuristic_slots(record: &WarningRecord, meta: Option<&PackageMetadata>, cluster_size: usize) -> Slots {
    let s = SnippetStats::analyze(&record.code_snippet);
    let pattern = bug_pattern(record);
    let mut v = Slots { names: Vec::with_capacity(96), values: Vec::with_capacity(96) };
    let n = |x: usize| x as f64;

    v.push("generic_param_count", n(s.generic_params));
    v.push("generic_param_count_log", log1p10(n(s.generic_params)));
    v.push("trait_bound_flag", flag(s.trait_bounds > 0));
    v.push("trait_bound_count", n(s.trait_bounds));
    v.push("generic_nesting_depth", n(s.generic_nesting_depth));
    v.push("lifetime_param_count", n(s.lifetime_params));
    v.push("static_lifetime_flag", flag(s.static_lifetime));
    v.push("where_clause_flag", flag(s.where_clause));
    v.push("impl_trait_flag", flag(s.impl_trait));
    v.push("dyn_trait_flag", flag(s.dyn_trait));
    v.push("fn_trait_bound_flag", flag(s.fn_trait_bound));

    let borrow_ratio = if s.ident_tokens == 0 {
        IMPUTED_RATIO
    } else {
        (n(s.borrows) / n(s.ident_tokens)).min(1.0)
    };
    v.push("borrow_ratio", borrow_ratio);
    let mut_borrow_ratio = if s.empty {
        IMPUTED_RATIO
    } else if s.borrows == 0 {
        0.0
    } else {
        n(s.mut_borrows) / n(s.borrows)
    };
    v.push("mut_borrow_ratio", mut_borrow_ratio);
    v.push("borrow_nesting_depth", n(s.borrow_nesting_depth));
    v.push("smart_pointer_count", n(s.smart_pointers));
    v.push("smart_pointer_flag", flag(s.smart_pointers > 0));
    v.push("box_flag", flag(s.boxes));
    v.push("rc_arc_flag", flag(s.rc_arc));
    v.push("cell_flag", flag(s.cells));
    v.push("raw_pointer_count", n(s.raw_pointers));
    v.push("move_closure_flag", flag(s.move_closure));
    v.push("as_cast_count", n(s.as_casts));

    let cc = s.cyclomatic_complexity();
    v.push("cyclomatic_complexity", n(cc));
    v.push("cyclomatic_complexity_log", log1p10(n(cc)));
    v.push("branch_count", n(s.branches));
    v.push("loop_count", n(s.loops));
    v.push("loop_nesting_depth", n(s.loop_nesting_depth));
    v.push("panic_path_count", n(s.panic_paths));
    v.push("unwrap_count", n(s.unwraps));
    v.push("explicit_panic_flag", flag(s.explicit_panic));
    v.push("assert_count", n(s.asserts));
    v.push("early_return_count", n(s.early_returns));
    v.push("max_brace_depth", n(s.max_brace_depth));

    v.push("unsafe_block_count", n(s.unsafe_blocks));
    v.push("unsafe_fn_flag", flag(s.unsafe_fn));
    v.push("bypass_category_panic_safety", flag(pattern == BugPattern::PanicSafety));
    v.push("bypass_category_higher_order_invariant", flag(pattern == BugPattern::HigherOrderInvariant));
    v.push("bypass_category_send_sync_variance", flag(pattern == BugPattern::SendSyncVariance));
    v.push("bypass_category_unknown", flag(pattern == BugPattern::Unknown));
    v.push("bypass_to_danger_distance", n(s.bypass_to_danger.unwrap_or(0)));
    v.push("bypass_op_count", n(s.bypass_ops));
    v.push("danger_op_count", n(s.danger_ops));
    v.push("transmute_flag", flag(s.transmute));
    v.push("set_len_flag", flag(s.set_len));
    v.push("ptr_read_write_flag", flag(s.ptr_read_write));
    v.push("uninit_flag", flag(s.uninit));
    v.push("drop_impl_flag", flag(s.drop_impl));
    v.push("unsafe_impl_send_sync_flag", flag(s.unsafe_impl_send_sync));
    v.push("phantom_data_flag", flag(s.phantom_data));
    v.push("ffi_extern_flag", flag(s.ffi_extern));

    match meta {
        Some(m) => {
            v.push("download_count_log", log1p10(m.download_count as f64));
            v.push("download_count_imputed", 0.0);
            v.push("unsafe_prevalence", m.unsafe_prevalence);
            v.push("unsafe_prevalence_imputed", 0.0);
            v.push("package_loc_log", log1p10(m.total_loc as f64));
            v.push("package_loc_imputed", 0.0);
        }
        None => {
            v.push("download_count_log", 0.0);
            v.push("download_count_imputed", 1.0);
            v.push("unsafe_prevalence", IMPUTED_RATIO);
            v.push("unsafe_prevalence_imputed", 1.0);
            v.push("package_loc_log", 0.0);
            v.push("package_loc_imputed", 1.0);
        }
    }
    v.push("public_api_flag", flag(s.public_api));
    v.push("lines_of_code", n(s.lines_of_code));
    v.push("lines_of_code_log", log1p10(n(s.lines_of_code)));
    v.push("parameter_count", n(s.parameters));
    v.push("self_receiver_flag", flag(s.self_receiver));
    let comment_density = if s.nonblank_lines == 0 {
        IMPUTED_RATIO
    } else {
        (n(s.comment_lines) / n(s.nonblank_lines)).min(1.0)
    };
    v.push("comment_density", comment_density);
    v.push("doc_comment_flag", flag(s.doc_comment));
    v.push("snippet_imputed", flag(s.empty));
    v.push("snippet_char_count_log", log1p10(record.code_snippet.chars().count() as f64));
    v.push("ident_token_count", n(s.ident_tokens));
    v.push("macro_invocation_count", n(s.macro_invocations));
    let path = record.file.as_str();
    let in_dir = |d: &str| path.split('/').any(|c| c == d);
    v.push("test_path_flag", flag(in_dir("tests") || in_dir("test") || path.ends_with("_test.rs") || path.ends_with("/tests.rs")));
    v.push("example_or_bench_path_flag", flag(in_dir("examples") || in_dir("benches")));
    v.push("file_depth", n(path.split('/').filter(|c| !c.is_empty()).count().saturating_sub(1)));
    v.push("snippet_elided_flag", flag(s.elided));

    let checker = record.analyzer.as_str();
    let known = ["UnsafeDataflow", "SendSyncVariance", "UnsafeDestructor"];
    v.push("checker_unsafe_dataflow", flag(checker == known[0]));
    v.push("checker_send_sync_variance", flag(checker == known[1]));
    v.push("checker_unsafe_destructor", flag(checker == known[2]));
    v.push("checker_other", flag(!known.contains(&checker)));
    v.push("precision_level_error", flag(record.level == Level::Error));
    v.push("precision_level_warning", flag(record.level == Level::Warning));
    v.push("precision_level_info", flag(record.level == Level::Info));
    let ordinal = match record.level {
        Level::Error => 2.0,
        Level::Warning => 1.0,
        Level::Info => 0.0,
    };
    v.push("precision_level_ordinal", ordinal);
    v.push("op_type_present", flag(record.op_type.as_deref().is_some_and(|o| !o.is_empty())));
    let cluster_size = cluster_size.max(1);
    v.push("cluster_size", n(cluster_size));
    v.push("cluster_size_log", log1p10(n(cluster_size)));
    v.push("clustered_flag", flag(cluster_size > 1));
    v.push("span_line_count", f64::from(record.span.line_count()));
    v.push("span_single_line_flag", flag(record.span.start_line == record.span.end_line));
    v.push("description_len_log", log1p10(record.description.chars().count() as f64));
    let backticks = record.description.matches('`').count();
    v.push("description_names_target_flag", flag(backticks >= 2));

    v
}
