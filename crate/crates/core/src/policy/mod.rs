//! Actor-critic network: a shared two-layer ReLU trunk with dropout, a
//! three-way policy head and a scalar value head.

mod distribution;
mod network;

pub use distribution::{greedy_index, masked_softmax, select_action, ActionDistribution, ConfidenceSignals, SelectionMode};
pub use network::{policy_forward, ForwardPass, PolicyParams, PolicyShape, DEFAULT_DROPOUT, DEFAULT_HIDDEN, N_ACTIONS};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PolicyError {
    #[error("{what} has length {found}, expected {expected}")]
    DimensionMismatch { what: &'static str, expected: usize, found: usize },
    #[error("dropout rate {0} outside [0, 1)")]
    InvalidDropout(f64),
    #[error("invalid layer shape {0:?}")]
    InvalidShape(PolicyShape),
    #[error("weight {0} is not finite")]
    NonFinite(usize),
    #[error("no action has positive probability after masking")]
    DegenerateDistribution,
}
