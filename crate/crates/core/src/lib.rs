//! Reinforcement-learning triage of static-analysis memory-safety warnings.
//!
//! The pipeline ingests analyzer reports ([`warning_store`]), turns each
//! warning into a fixed-order feature vector ([`featurizer`]), and lets a
//! small actor-critic policy ([`policy`]) trained with PPO ([`trainer`])
//! decide per warning whether to classify it as a true or false positive,
//! or to first gather dynamic evidence through a fuzzing backend
//! ([`fuzz_backend`]). The episode structure and rewards live in
//! [`triage_env`]; metrics and feature importance in [`evaluator`].
//!
//! Network and optimizer math is generic over [`Scalar`] (`f32` or `f64`);
//! the aliases below fix the scalar for the common case.

pub mod evaluator;
pub mod featurizer;
pub mod fuzz_backend;
pub mod hash;
pub mod jsonl;
pub mod policy;
pub mod scalar;
pub mod synthetic;
pub mod trainer;
pub mod triage_env;
pub mod warning_store;

pub use scalar::Scalar;

/// Policy parameters in double precision.
pub type Policy = policy::PolicyParams<f64>;
/// Policy parameters in single precision.
pub type PolicyF32 = policy::PolicyParams<f32>;
/// Training batch in double precision.
pub type Batch = trainer::TrajectoryBatch<f64>;
