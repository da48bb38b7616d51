use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::distribution::ActionDistribution;
use super::PolicyError;
use crate::hash::derive_seed;
use crate::Scalar;

pub const N_ACTIONS: usize = 3;
pub const DEFAULT_HIDDEN: [usize; 2] = [256, 128];
pub const DEFAULT_DROPOUT: f64 = 0.2;

/// Layer widths: input, two hidden layers, a 3-way policy head and a scalar value head.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyShape {
    pub input: usize,
    pub hidden: [usize; 2],
}

/// Start offsets of each block in the flat weight vector.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Layout {
    pub w1: usize,
    pub b1: usize,
    pub w2: usize,
    pub b2: usize,
    pub wp: usize,
    pub bp: usize,
    pub wv: usize,
    pub bv: usize,
    pub total: usize,
}

impl PolicyShape {
    pub fn new(input: usize) -> Self {
        Self { input, hidden: DEFAULT_HIDDEN }
    }

    /// `[input, h1, h2, 3]`.
    pub fn dims(&self) -> [usize; 4] {
        [self.input, self.hidden[0], self.hidden[1], N_ACTIONS]
    }

    pub(crate) fn layout(&self) -> Layout {
        let [n, h1, h2] = [self.input, self.hidden[0], self.hidden[1]];
        let w1 = 0;
        let b1 = w1 + h1 * n;
        let w2 = b1 + h1;
        let b2 = w2 + h2 * h1;
        let wp = b2 + h2;
        let bp = wp + N_ACTIONS * h2;
        let wv = bp + N_ACTIONS;
        let bv = wv + h2;
        Layout { w1, b1, w2, b2, wp, bp, wv, bv, total: bv + 1 }
    }

    pub fn param_count(&self) -> usize {
        self.layout().total
    }
}

/// Network parameters in one flat row-major vector, in the order
/// W1, b1, W2, b2, W_policy, b_policy, W_value, b_value.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyParams<T> {
    pub shape: PolicyShape,
    pub dropout: f64,
    pub seed: u64,
    pub weights: Vec<T>,
}

/// Activations kept for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardPass<T> {
    pub input: Vec<T>,
    pub h1: Vec<T>,
    /// ReLU derivative times dropout scale per hidden unit.
    pub gate1: Vec<T>,
    pub h2: Vec<T>,
    pub gate2: Vec<T>,
    pub logits: [T; N_ACTIONS],
    pub value: T,
}

fn affine<T: Scalar>(w: &[T], b: &[T], x: &[T]) -> Vec<T> {
    let n = x.len();
    b.iter()
        .enumerate()
        .map(|(o, &bias)| {
            let row = &w[o * n..(o + 1) * n];
            row.iter().zip(x).fold(bias, |acc, (&wi, &xi)| acc + wi * xi)
        })
        .collect()
}

/// ReLU followed by optional inverted dropout; returns (activations, gates).
fn relu_dropout<T: Scalar, R: RngCore + ?Sized>(pre: Vec<T>, rate: f64, rng: Option<&mut R>) -> (Vec<T>, Vec<T>) {
    let mut gates: Vec<T> = pre.iter().map(|&a| if a > T::zero() { T::one() } else { T::zero() }).collect();
    if let Some(rng) = rng {
        if rate > 0.0 {
            let keep = T::lit(1.0 / (1.0 - rate));
            for g in gates.iter_mut() {
                // Draw for every unit so the stream does not depend on activations.
                let dropped = rng.random::<f64>() < rate;
                *g = if dropped { T::zero() } else { *g * keep };
            }
        }
    }
    let h = pre.iter().zip(&gates).map(|(&a, &g)| a * g).collect();
    (h, gates)
}

impl<T: Scalar> PolicyParams<T> {
    pub fn zeros(shape: PolicyShape, dropout: f64) -> Self {
        Self { shape, dropout, seed: 0, weights: vec![T::zero(); shape.param_count()] }
    }

    /// Weights uniform in ±√(6/(fan_in+fan_out)) per layer, biases zero.
    pub fn init(shape: PolicyShape, dropout: f64, seed: u64) -> Self {
        let mut p = Self::zeros(shape, dropout);
        p.seed = seed;
        let l = shape.layout();
        let [n, h1, h2, a] = shape.dims();
        let blocks = [(l.w1, h1, n), (l.w2, h2, h1), (l.wp, a, h2), (l.wv, 1, h2)];
        for (tag, (start, fan_out, fan_in)) in blocks.into_iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[tag as u64]));
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for w in &mut p.weights[start..start + fan_in * fan_out] {
                *w = T::lit(rng.random_range(-limit..limit));
            }
        }
        p
    }

    pub fn validate(&self) -> Result<(), PolicyError> {
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(PolicyError::InvalidDropout(self.dropout));
        }
        if self.shape.dims().contains(&0) {
            return Err(PolicyError::InvalidShape(self.shape));
        }
        if self.weights.len() != self.shape.param_count() {
            return Err(PolicyError::DimensionMismatch { what: "weights", expected: self.shape.param_count(), found: self.weights.len() });
        }
        if let Some(i) = self.weights.iter().position(|w| !w.is_finite()) {
            return Err(PolicyError::NonFinite(i));
        }
        Ok(())
    }

    pub fn cast<U: Scalar>(&self) -> PolicyParams<U> {
        PolicyParams {
            shape: self.shape,
            dropout: self.dropout,
            seed: self.seed,
            weights: self.weights.iter().map(|w| U::lit(w.to_f64_lossy())).collect(),
        }
    }

    /// Full forward pass. Dropout is applied only when `dropout_rng` is given.
    pub fn forward(&self, state: &[T], dropout_rng: Option<&mut dyn RngCore>) -> Result<ForwardPass<T>, PolicyError> {
        if state.len() != self.shape.input {
            return Err(PolicyError::DimensionMismatch { what: "state", expected: self.shape.input, found: state.len() });
        }
        let l = self.shape.layout();
        let w = &self.weights;
        let mut rng = dropout_rng;
        let (h1, gate1) = relu_dropout(affine(&w[l.w1..l.b1], &w[l.b1..l.w2], state), self.dropout, rng.as_deref_mut());
        let (h2, gate2) = relu_dropout(affine(&w[l.w2..l.b2], &w[l.b2..l.wp], &h1), self.dropout, rng);
        let head = affine(&w[l.wp..l.bp], &w[l.bp..l.wv], &h2);
        let value = affine(&w[l.wv..l.bv], &w[l.bv..l.total], &h2)[0];
        Ok(ForwardPass { input: state.to_vec(), h1, gate1, h2, gate2, logits: [head[0], head[1], head[2]], value })
    }

    /// Evaluation-mode forward pass: deterministic, no dropout.
    pub fn distribution(&self, state: &[T]) -> Result<ActionDistribution, PolicyError> {
        let pass = self.forward(state, None)?;
        Ok(ActionDistribution::from_logits(pass.logits.map(|z| z.to_f64_lossy()), pass.value.to_f64_lossy()))
    }

    /// Accumulates into `grads` the gradient of a loss whose partial
    /// derivatives with respect to the logits and value are given.
    pub fn backward(&self, pass: &ForwardPass<T>, dlogits: [T; N_ACTIONS], dvalue: T, grads: &mut [T]) {
        let l = self.shape.layout();
        let [n, h1n, h2n, _] = self.shape.dims();
        let w = &self.weights;

        let mut dh2 = vec![T::zero(); h2n];
        for (a, &dz) in dlogits.iter().enumerate() {
            grads[l.bp + a] += dz;
            let row = l.wp + a * h2n;
            for j in 0..h2n {
                grads[row + j] += dz * pass.h2[j];
                dh2[j] += dz * w[row + j];
            }
        }
        grads[l.bv] += dvalue;
        for j in 0..h2n {
            grads[l.wv + j] += dvalue * pass.h2[j];
            dh2[j] += dvalue * w[l.wv + j];
        }

        let mut dh1 = vec![T::zero(); h1n];
        for o in 0..h2n {
            let da = dh2[o] * pass.gate2[o];
            if da == T::zero() {
                continue;
            }
            grads[l.b2 + o] += da;
            let row = l.w2 + o * h1n;
            for i in 0..h1n {
                grads[row + i] += da * pass.h1[i];
                dh1[i] += da * w[row + i];
            }
        }

        for o in 0..h1n {
            let da = dh1[o] * pass.gate1[o];
            if da == T::zero() {
                continue;
            }
            grads[l.b1 + o] += da;
            let row = l.w1 + o * n;
            for i in 0..n {
                grads[row + i] += da * pass.input[i];
            }
        }
    }
}

/// Forward pass in evaluation mode; `training` enables dropout drawn from `rng`.
pub fn policy_forward<T: Scalar>(params: &PolicyParams<T>, state: &[T], training: bool, rng: &mut dyn RngCore) -> Result<ActionDistribution, PolicyError> {
    let pass = params.forward(state, if training { Some(rng) } else { None })?;
    Ok(ActionDistribution::from_logits(pass.logits.map(|z| z.to_f64_lossy()), pass.value.to_f64_lossy()))
}
