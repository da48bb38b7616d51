use serde::{Deserialize, Serialize};

use super::config::TrainConfig;
use crate::featurizer::{ManifestDigest, NormalizerStats};
use crate::policy::{PolicyError, PolicyParams, PolicyShape, N_ACTIONS};
use crate::triage_env::RewardSpec;
use crate::Scalar;

pub const CHECKPOINT_FORMAT_VERSION: u32 = 1;

/// One line of the training log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub mean_return: f64,
    pub val_accuracy: f64,
    pub val_f1: f64,
    /// Mean greedy episode return on the validation split.
    pub val_return: f64,
    /// Fraction of validation warnings the greedy policy fuzzed.
    pub fuzz_rate: f64,
}

impl EpochLog {
    pub fn line(&self) -> String {
        format!(
            "epoch={} mean_return={:.4} val_accuracy={:.4} val_f1={:.4} val_return={:.4} fuzz_rate={:.4}",
            self.epoch, self.mean_return, self.val_accuracy, self.val_f1, self.val_return, self.fuzz_rate
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingHistory {
    pub epochs: Vec<EpochLog>,
    pub best_epoch: usize,
}

impl TrainingHistory {
    pub fn best(&self) -> Option<&EpochLog> {
        self.epochs.iter().find(|e| e.epoch == self.best_epoch)
    }
}

/// Trained policy plus everything needed to run it on new warnings.
/// Serialized as JSON with fields in declaration order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyCheckpoint {
    pub format_version: u32,
    pub manifest_digest: ManifestDigest,
    /// `[input, hidden1, hidden2, actions]`.
    pub dims: [usize; 4],
    /// Flat row-major weights (see [`PolicyParams`]).
    pub weights: Vec<f64>,
    pub normalizer: NormalizerStats,
    pub config: TrainConfig,
    pub reward: RewardSpec,
    pub history: TrainingHistory,
}

#[derive(Debug, thiserror::Error)]
pub enum CheckpointError {
    #[error("malformed checkpoint: {0}")]
    Format(#[from] serde_json::Error),
    #[error("unsupported checkpoint format version {0}")]
    Version(u32),
    #[error("manifest digest mismatch: checkpoint has {checkpoint}, features have {features}")]
    DigestMismatch { checkpoint: ManifestDigest, features: ManifestDigest },
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl PolicyCheckpoint {
    pub fn new<T: Scalar>(
        params: &PolicyParams<T>,
        normalizer: NormalizerStats,
        config: TrainConfig,
        reward: RewardSpec,
        history: TrainingHistory,
    ) -> Self {
        Self {
            format_version: CHECKPOINT_FORMAT_VERSION,
            manifest_digest: normalizer.manifest_digest,
            dims: params.shape.dims(),
            weights: params.weights.iter().map(|w| w.to_f64_lossy()).collect(),
            normalizer,
            config,
            reward,
            history,
        }
    }

    pub fn params<T: Scalar>(&self) -> Result<PolicyParams<T>, PolicyError> {
        if self.dims[3] != N_ACTIONS {
            return Err(PolicyError::DimensionMismatch { what: "action head", expected: N_ACTIONS, found: self.dims[3] });
        }
        let p = PolicyParams::<f64> {
            shape: PolicyShape { input: self.dims[0], hidden: [self.dims[1], self.dims[2]] },
            dropout: self.config.dropout,
            seed: self.config.seed,
            weights: self.weights.clone(),
        };
        p.validate()?;
        Ok(p.cast())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec(self).expect("checkpoint serializes");
        out.push(b'\n');
        out
    }

    /// Parses without checking the manifest digest.
    pub fn from_bytes_unverified(bytes: &[u8]) -> Result<Self, CheckpointError> {
        let ckpt: Self = serde_json::from_slice(bytes)?;
        if ckpt.format_version != CHECKPOINT_FORMAT_VERSION {
            return Err(CheckpointError::Version(ckpt.format_version));
        }
        ckpt.params::<f64>()?;
        Ok(ckpt)
    }

    /// Parses and requires the checkpoint to match `expected`.
    pub fn from_bytes(bytes: &[u8], expected: ManifestDigest) -> Result<Self, CheckpointError> {
        let ckpt = Self::from_bytes_unverified(bytes)?;
        ckpt.check_digest(expected)?;
        Ok(ckpt)
    }

    pub fn check_digest(&self, features: ManifestDigest) -> Result<(), CheckpointError> {
        if self.manifest_digest != features {
            return Err(CheckpointError::DigestMismatch { checkpoint: self.manifest_digest, features });
        }
        Ok(())
    }

    pub fn save(&self, path: &std::path::Path) -> Result<(), CheckpointError> {
        Ok(std::fs::write(path, self.to_bytes())?)
    }

    pub fn load(path: &std::path::Path, expected: ManifestDigest) -> Result<Self, CheckpointError> {
        Self::from_bytes(&std::fs::read(path)?, expected)
    }
}
