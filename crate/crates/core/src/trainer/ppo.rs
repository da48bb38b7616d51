use rand::seq::SliceRandom;
use rand::RngCore;

use super::config::TrainConfig;
use super::rollout::TrajectoryBatch;
use super::TrainError;
use crate::policy::{PolicyParams, N_ACTIONS};
use crate::Scalar;

const FUZZ: usize = 2;

/// Adaptive moment estimation (β₁ = 0.9, β₂ = 0.999, ε = 1e-8).
#[derive(Debug, Clone, PartialEq)]
pub struct Adam<T> {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<T>,
    v: Vec<T>,
    t: i32,
}

impl<T: Scalar> Adam<T> {
    pub fn new(n_params: usize, learning_rate: f64) -> Self {
        Self { learning_rate, beta1: 0.9, beta2: 0.999, eps: 1e-8, m: vec![T::zero(); n_params], v: vec![T::zero(); n_params], t: 0 }
    }

    /// Descends along `grads`.
    pub fn step(&mut self, weights: &mut [T], grads: &[T]) {
        self.t += 1;
        let (b1, b2) = (T::lit(self.beta1), T::lit(self.beta2));
        let one = T::one();
        let c1 = T::lit(1.0 - self.beta1.powi(self.t));
        let c2 = T::lit(1.0 - self.beta2.powi(self.t));
        let (lr, eps) = (T::lit(self.learning_rate), T::lit(self.eps));
        for i in 0..weights.len() {
            let g = grads[i];
            self.m[i] = b1 * self.m[i] + (one - b1) * g;
            self.v[i] = b2 * self.v[i] + (one - b2) * g * g;
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            weights[i] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
}

/// `min(ρA, clip(ρ, 1−ε, 1+ε)A)` and whether the unclipped branch is active.
pub fn clipped_surrogate(ratio: f64, advantage: f64, epsilon: f64) -> (f64, bool) {
    let unclipped = ratio * advantage;
    let clipped = ratio.clamp(1.0 - epsilon, 1.0 + epsilon) * advantage;
    if unclipped <= clipped {
        (unclipped, true)
    } else {
        (clipped, false)
    }
}

/// Mean loss terms over a minibatch.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LossReport {
    /// `−surrogate + c_v·value_mse − c_e·entropy`.
    pub total: f64,
    pub surrogate: f64,
    pub value_mse: f64,
    pub entropy: f64,
    /// Fraction of samples whose surrogate was clipped.
    pub clip_fraction: f64,
}

/// Log-probabilities over legal actions (masked entries are −∞).
fn log_softmax<T: Scalar>(logits: &[T; N_ACTIONS], mask_fuzz: bool) -> [T; N_ACTIONS] {
    let legal = |i: usize| !(mask_fuzz && i == FUZZ);
    let max = (0..N_ACTIONS).filter(|&i| legal(i)).map(|i| logits[i]).fold(T::neg_infinity(), T::max);
    let lse = max + (0..N_ACTIONS).filter(|&i| legal(i)).map(|i| (logits[i] - max).exp()).sum::<T>().ln();
    std::array::from_fn(|i| if legal(i) { logits[i] - lse } else { T::neg_infinity() })
}

/// Loss and its gradient over the batch rows in `rows`. Dropout is
/// applied when `dropout_rng` is given.
pub fn ppo_loss_and_grad<T: Scalar>(
    params: &PolicyParams<T>,
    batch: &TrajectoryBatch<T>,
    rows: &[usize],
    config: &TrainConfig,
    mut dropout_rng: Option<&mut dyn RngCore>,
) -> Result<(LossReport, Vec<T>), TrainError> {
    let mut grads = vec![T::zero(); params.weights.len()];
    let m = rows.len() as f64;
    let inv_m = T::lit(1.0 / m);
    let (c_v, c_e) = (T::lit(config.value_coef), T::lit(config.entropy_coef));
    let mut report = LossReport::default();
    for &r in rows {
        let pass = params.forward(&batch.states[r], dropout_rng.as_mut().map(|g| &mut **g as &mut dyn RngCore))?;
        let logp = log_softmax(&pass.logits, batch.mask_fuzz[r]);
        let probs = logp.map(|l| l.exp());
        let a = batch.actions[r].index();
        let advantage = batch.advantages[r];
        let ratio = (logp[a].to_f64_lossy() - batch.logp[r]).exp();
        let (surrogate, active) = clipped_surrogate(ratio, advantage, config.clip_epsilon);
        let entropy = -(0..N_ACTIONS).filter(|&j| probs[j] > T::zero()).map(|j| probs[j] * logp[j]).sum::<T>();
        let target = T::lit(batch.returns[r] / config.return_scale);
        let err = pass.value - target;

        let d_logp = if active { T::lit(ratio * advantage) } else { T::zero() };
        let mut dlogits = [T::zero(); N_ACTIONS];
        for j in 0..N_ACTIONS {
            if probs[j] == T::zero() {
                continue;
            }
            let indicator = if j == a { T::one() } else { T::zero() };
            let d_surr = d_logp * (indicator - probs[j]);
            let d_ent = -probs[j] * (logp[j] + entropy);
            dlogits[j] = (-d_surr - c_e * d_ent) * inv_m;
        }
        let dvalue = T::lit(2.0) * c_v * err * inv_m;
        params.backward(&pass, dlogits, dvalue, &mut grads);

        report.surrogate += surrogate / m;
        report.value_mse += (err * err).to_f64_lossy() / m;
        report.entropy += entropy.to_f64_lossy() / m;
        report.clip_fraction += f64::from(u8::from(!active)) / m;
    }
    report.total = -report.surrogate + config.value_coef * report.value_mse - config.entropy_coef * report.entropy;
    Ok((report, grads))
}

/// Runs `ppo_inner_epochs` passes of shuffled minibatches. On a
/// non-finite loss nothing is applied and the offending minibatch is
/// reported.
pub fn ppo_update<T: Scalar>(
    params: &mut PolicyParams<T>,
    optimizer: &mut Adam<T>,
    batch: &TrajectoryBatch<T>,
    config: &TrainConfig,
    rng: &mut dyn RngCore,
) -> Result<LossReport, TrainError> {
    let mut work = params.clone();
    let mut opt = optimizer.clone();
    let mut order: Vec<usize> = (0..batch.len()).collect();
    let mut mean = LossReport::default();
    let mut count = 0usize;
    for pass in 0..config.ppo_inner_epochs {
        order.shuffle(rng);
        for (k, rows) in order.chunks(config.minibatch_size).enumerate() {
            let (report, grads) = ppo_loss_and_grad(&work, batch, rows, config, Some(&mut *rng))?;
            if !report.total.is_finite() || grads.iter().any(|g| !g.is_finite()) {
                return Err(TrainError::NonFiniteLoss { inner_epoch: pass, minibatch: k, rows: rows.to_vec() });
            }
            opt.step(&mut work.weights, &grads);
            mean.total += report.total;
            mean.surrogate += report.surrogate;
            mean.value_mse += report.value_mse;
            mean.entropy += report.entropy;
            mean.clip_fraction += report.clip_fraction;
            count += 1;
        }
    }
    *params = work;
    *optimizer = opt;
    let c = count.max(1) as f64;
    Ok(LossReport {
        total: mean.total / c,
        surrogate: mean.surrogate / c,
        value_mse: mean.value_mse / c,
        entropy: mean.entropy / c,
        clip_fraction: mean.clip_fraction / c,
    })
}
