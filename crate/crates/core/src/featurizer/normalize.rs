use serde::{Deserialize, Serialize};

use super::extract::{FeatureError, FeatureVector};
use super::manifest::{FeatureManifest, ManifestDigest};
use crate::warning_store::Split;

/// Per-slot z-score statistics fitted on the training split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizerStats {
    pub mean: Vec<f64>,
    /// Sample standard deviation (ddof = 1).
    pub sd: Vec<f64>,
    /// Slots passed through unchanged (one-hot categoricals).
    pub passthrough: Vec<bool>,
    pub fitted_on: Split,
    pub manifest_digest: ManifestDigest,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NormalizeError {
    #[error("normalizer needs at least 2 training vectors, got {0}")]
    EmptyTrainSet(usize),
    #[error("normalizer must be fitted on the train split, not {0}")]
    NotTrainSplit(Split),
    #[error(transparent)]
    Feature(#[from] FeatureError),
}

pub fn fit_normalizer(
    manifest: &FeatureManifest,
    train: &[&FeatureVector],
    fitted_on: Split,
) -> Result<NormalizerStats, NormalizeError> {
    if fitted_on != Split::Train {
        return Err(NormalizeError::NotTrainSplit(fitted_on));
    }
    if train.len() < 2 {
        return Err(NormalizeError::EmptyTrainSet(train.len()));
    }
    let dim = manifest.len();
    for v in train {
        check_vector(manifest.digest, dim, v)?;
    }
    let n = train.len() as f64;
    let mut mean = vec![0.0; dim];
    for v in train {
        for (m, x) in mean.iter_mut().zip(&v.values) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; dim];
    for v in train {
        for ((s, x), m) in var.iter_mut().zip(&v.values).zip(&mean) {
            *s += (x - m) * (x - m);
        }
    }
    let sd = var.into_iter().map(|s| (s / (n - 1.0)).sqrt()).collect();
    Ok(NormalizerStats {
        mean,
        sd,
        passthrough: manifest.one_hot_mask(),
        fitted_on,
        manifest_digest: manifest.digest,
    })
}

fn check_vector(digest: ManifestDigest, dim: usize, v: &FeatureVector) -> Result<(), FeatureError> {
    if v.manifest_digest != digest {
        return Err(FeatureError::DigestMismatch { expected: digest, found: v.manifest_digest });
    }
    if v.values.len() != dim {
        return Err(FeatureError::LengthMismatch { expected: dim, found: v.values.len() });
    }
    Ok(())
}

impl NormalizerStats {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// `(x - mean) / sd`, or 0 where the training column was constant.
    pub fn normalize_values(&self, values: &[f64]) -> Vec<f64> {
        values
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                if self.passthrough[i] {
                    x
                } else if self.sd[i] == 0.0 {
                    0.0
                } else {
                    (x - self.mean[i]) / self.sd[i]
                }
            })
            .collect()
    }

    pub fn normalize(&self, v: &FeatureVector) -> Result<FeatureVector, FeatureError> {
        check_vector(self.manifest_digest, self.dim(), v)?;
        Ok(FeatureVector {
            warning_id: v.warning_id,
            manifest_digest: v.manifest_digest,
            values: self.normalize_values(&v.values),
        })
    }
}
