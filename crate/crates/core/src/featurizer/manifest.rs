use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::hash::StableHasher;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FeatureFamily {
    MirSemantic,
    Structural,
    AnalysisSpecific,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureKind {
    Count,
    Ratio,
    Flag,
    CategoricalOneHot,
    LogScaled,
}

impl FeatureFamily {
    pub fn as_str(self) -> &'static str {
        match self {
            FeatureFamily::MirSemantic => "MirSemantic",
            FeatureFamily::Structural => "Structural",
            FeatureFamily::AnalysisSpecific => "AnalysisSpecific",
        }
    }
}

impl FeatureKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FeatureKind::Count => "count",
            FeatureKind::Ratio => "ratio",
            FeatureKind::Flag => "flag",
            FeatureKind::CategoricalOneHot => "categorical-one-hot",
            FeatureKind::LogScaled => "log-scaled",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub name: &'static str,
    pub family: FeatureFamily,
    pub kind: FeatureKind,
}

/// Stable digest of a manifest's entry list, shown as 16 hex digits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ManifestDigest(pub u64);

impl fmt::Display for ManifestDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

impl FromStr for ManifestDigest {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.len() != 16 {
            return Err(format!("invalid manifest digest {s:?}"));
        }
        u64::from_str_radix(s, 16)
            .map(ManifestDigest)
            .map_err(|_| format!("invalid manifest digest {s:?}"))
    }
}

impl Serialize for ManifestDigest {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ManifestDigest {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

use FeatureFamily::{AnalysisSpecific as A, MirSemantic as M, Structural as S};
use FeatureKind::{CategoricalOneHot as OneHot, Count, Flag, LogScaled as Log, Ratio};

macro_rules! entries {
    ($(($name:literal, $fam:ident, $kind:ident)),* $(,)?) => {
        &[$(ManifestEntry { name: $name, family: $fam, kind: $kind }),*]
    };
}

/// Version-1 feature layout. Order is part of the format.
const V1_ENTRIES: &[ManifestEntry] = entries![
    // type system
    ("generic_param_count", M, Count),
    ("generic_param_count_log", M, Log),
    ("trait_bound_flag", M, Flag),
    ("trait_bound_count", M, Count),
    ("generic_nesting_depth", M, Count),
    ("lifetime_param_count", M, Count),
    ("static_lifetime_flag", M, Flag),
    ("where_clause_flag", M, Flag),
    ("impl_trait_flag", M, Flag),
    ("dyn_trait_flag", M, Flag),
    ("fn_trait_bound_flag", M, Flag),
    // ownership and borrowing
    ("borrow_ratio", M, Ratio),
    ("mut_borrow_ratio", M, Ratio),
    ("borrow_nesting_depth", M, Count),
    ("smart_pointer_count", M, Count),
    ("smart_pointer_flag", M, Flag),
    ("box_flag", M, Flag),
    ("rc_arc_flag", M, Flag),
    ("cell_flag", M, Flag),
    ("raw_pointer_count", M, Count),
    ("move_closure_flag", M, Flag),
    ("as_cast_count", M, Count),
    // control flow
    ("cyclomatic_complexity", M, Count),
    ("cyclomatic_complexity_log", M, Log),
    ("branch_count", M, Count),
    ("loop_count", M, Count),
    ("loop_nesting_depth", M, Count),
    ("panic_path_count", M, Count),
    ("unwrap_count", M, Count),
    ("explicit_panic_flag", M, Flag),
    ("assert_count", M, Count),
    ("early_return_count", M, Count),
    ("max_brace_depth", M, Count),
    // unsafe operation context
    ("unsafe_block_count", M, Count),
    ("unsafe_fn_flag", M, Flag),
    ("bypass_category_panic_safety", M, OneHot),
    ("bypass_category_higher_order_invariant", M, OneHot),
    ("bypass_category_send_sync_variance", M, OneHot),
    ("bypass_category_unknown", M, OneHot),
    ("bypass_to_danger_distance", M, Count),
    ("bypass_op_count", M, Count),
    ("danger_op_count", M, Count),
    ("transmute_flag", M, Flag),
    ("set_len_flag", M, Flag),
    ("ptr_read_write_flag", M, Flag),
    ("uninit_flag", M, Flag),
    ("drop_impl_flag", M, Flag),
    ("unsafe_impl_send_sync_flag", M, Flag),
    ("phantom_data_flag", M, Flag),
    ("ffi_extern_flag", M, Flag),
    // package and module context
    ("download_count_log", S, Log),
    ("download_count_imputed", S, Flag),
    ("unsafe_prevalence", S, Ratio),
    ("unsafe_prevalence_imputed", S, Flag),
    ("package_loc_log", S, Log),
    ("package_loc_imputed", S, Flag),
    ("public_api_flag", S, Flag),
    ("lines_of_code", S, Count),
    ("lines_of_code_log", S, Log),
    ("parameter_count", S, Count),
    ("self_receiver_flag", S, Flag),
    ("comment_density", S, Ratio),
    ("doc_comment_flag", S, Flag),
    ("snippet_imputed", S, Flag),
    ("snippet_char_count_log", S, Log),
    ("ident_token_count", S, Count),
    ("macro_invocation_count", S, Count),
    ("test_path_flag", S, Flag),
    ("example_or_bench_path_flag", S, Flag),
    ("file_depth", S, Count),
    ("snippet_elided_flag", S, Flag),
    // analyzer-derived
    ("checker_unsafe_dataflow", A, OneHot),
    ("checker_send_sync_variance", A, OneHot),
    ("checker_unsafe_destructor", A, OneHot),
    ("checker_other", A, OneHot),
    ("precision_level_error", A, OneHot),
    ("precision_level_warning", A, OneHot),
    ("precision_level_info", A, OneHot),
    ("precision_level_ordinal", A, Count),
    ("op_type_present", A, Flag),
    ("cluster_size", A, Count),
    ("cluster_size_log", A, Log),
    ("clustered_flag", A, Flag),
    ("span_line_count", A, Count),
    ("span_single_line_flag", A, Flag),
    ("description_len_log", A, Log),
    ("description_names_target_flag", A, Flag),
];

/// Number of slots in the version-1 manifest.
pub const V1_FEATURE_COUNT: usize = 87;

/// Ordered, versioned list of named feature slots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureManifest {
    pub version: u32,
    pub entries: Vec<ManifestEntry>,
    pub digest: ManifestDigest,
}

impl FeatureManifest {
    pub fn v1() -> Self {
        Self::from_entries(1, V1_ENTRIES.to_vec())
    }

    /// Builds a manifest and computes its digest. The digest covers the
    /// entry list only, not the version number.
    pub fn from_entries(version: u32, entries: Vec<ManifestEntry>) -> Self {
        let mut h = StableHasher::new();
        for e in &entries {
            h.field_str(e.name).field_str(e.family.as_str()).field_str(e.kind.as_str());
        }
        let digest = ManifestDigest(h.finish());
        Self { version, entries, digest }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.name == name)
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.iter().map(|e| e.name)
    }

    /// Per-slot flag: true for one-hot categorical slots.
    pub fn one_hot_mask(&self) -> Vec<bool> {
        self.entries.iter().map(|e| e.kind == FeatureKind::CategoricalOneHot).collect()
    }

    /// Tab-separated audit listing: a `#` header, then `index name family kind`.
    pub fn export(&self) -> String {
        let mut out = format!("# feature manifest v{} digest {} ({} features)\n", self.version, self.digest, self.len());
        out.push_str("index\tname\tfamily\tkind\n");
        for (i, e) in self.entries.iter().enumerate() {
            out.push_str(&format!("{i}\t{}\t{}\t{}\n", e.name, e.family.as_str(), e.kind.as_str()));
        }
        out
    }
}

impl Default for FeatureManifest {
    fn default() -> Self {
        Self::v1()
    }
}
