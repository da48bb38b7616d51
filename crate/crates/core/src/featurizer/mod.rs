//! Fixed-order feature vectors in three families and train-split normalization.

mod extract;
mod lexical;
mod manifest;
mod normalize;

pub use extract::{
    extract_features, validate_values, ExtractionMode, FeatureError, FeatureVector, PackageMetadata,
    IMPUTED_RATIO, MAX_SNIPPET_BYTES,
};
pub use lexical::SnippetStats;
pub use manifest::{
    FeatureFamily, FeatureKind, FeatureManifest, ManifestDigest, ManifestEntry, V1_FEATURE_COUNT,
};
pub use normalize::{fit_normalizer, NormalizeError, NormalizerStats};

use crate::jsonl::{read_jsonl, write_jsonl, LineError};

/// Feature sidecar: one `{warning_id, manifest_digest, values}` per line.
pub fn write_feature_sidecar(vectors: &[FeatureVector]) -> String {
    write_jsonl(vectors)
}

pub fn read_feature_sidecar(text: &str) -> Result<Vec<FeatureVector>, LineError> {
    read_jsonl(text)
}

/// Package metadata file: one `PackageMetadata` per line.
pub fn read_package_metadata(text: &str) -> Result<Vec<PackageMetadata>, LineError> {
    read_jsonl(text)
}
