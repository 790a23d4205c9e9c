use rand::Rng;

use super::{init_params, ConditionalDensity, MixtureModel, ModelKind, Normalization};
use crate::mixture::{GaussianMixture, SIGMA_FLOOR};

pub const CLASSICAL_HIDDEN: usize = 5;
pub const CLASSICAL_MODES: usize = 5;
const OUTPUTS: usize = 3 * CLASSICAL_MODES;

// Flat layout: W1 (5x1), b1 (5), W2 (15x5, row-major), b2 (15).
const W1: usize = 0;
const B1: usize = W1 + CLASSICAL_HIDDEN;
const W2: usize = B1 + CLASSICAL_HIDDEN;
const B2: usize = W2 + OUTPUTS * CLASSICAL_HIDDEN;

/// `1 -> 5 (tanh) -> 15` has `5 + 5 + 75 + 15` trainable values.
pub const CLASSICAL_PARAM_COUNT: usize = B2 + OUTPUTS;

const LOG_SIGMA_MAX: f64 = 30.0;

/// Classical MDN: one tanh hidden layer of 5 units feeding 15 outputs that
/// split into 5 weight logits, 5 means and 5 log-stds.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalMdn {
    params: Vec<f64>,
    norm: Normalization,
}

struct Forward {
    hidden: [f64; CLASSICAL_HIDDEN],
    alpha: [f64; CLASSICAL_MODES],
    sigma: [f64; CLASSICAL_MODES],
    sigma_active: [bool; CLASSICAL_MODES],
    mixture: GaussianMixture,
}

impl ClassicalMdn {
    pub fn from_params(params: Vec<f64>, norm: Normalization) -> crate::Result<Self> {
        if params.len() != CLASSICAL_PARAM_COUNT {
            return Err(crate::Error::LengthMismatch {
                what: "classical MDN parameters",
                expected: CLASSICAL_PARAM_COUNT,
                actual: params.len(),
            });
        }
        Ok(Self { params, norm })
    }

    pub fn zeros() -> Self {
        Self {
            params: vec![0.0; CLASSICAL_PARAM_COUNT],
            norm: Normalization::default(),
        }
    }

    pub fn init<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self {
            params: init_params(rng, CLASSICAL_PARAM_COUNT),
            norm: Normalization::default(),
        }
    }

    pub fn w1(&self) -> &[f64] {
        &self.params[W1..B1]
    }

    pub fn b1(&self) -> &[f64] {
        &self.params[B1..W2]
    }

    /// Row-major `15 x 5`.
    pub fn w2(&self) -> &[f64] {
        &self.params[W2..B2]
    }

    pub fn b2(&self) -> &[f64] {
        &self.params[B2..]
    }

    fn forward(&self, x: f64) -> Forward {
        let t = self.norm.scale_x(x);
        let p = &self.params;
        let mut hidden = [0.0; CLASSICAL_HIDDEN];
        for (j, h) in hidden.iter_mut().enumerate() {
            *h = (p[W1 + j] * t + p[B1 + j]).tanh();
        }
        let mut out = [0.0; OUTPUTS];
        for (k, o) in out.iter_mut().enumerate() {
            let row = &p[W2 + k * CLASSICAL_HIDDEN..W2 + (k + 1) * CLASSICAL_HIDDEN];
            *o = p[B2 + k] + row.iter().zip(&hidden).map(|(w, h)| w * h).sum::<f64>();
        }

        let logits = &out[..CLASSICAL_MODES];
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut alpha = [0.0; CLASSICAL_MODES];
        for (a, l) in alpha.iter_mut().zip(logits) {
            *a = (l - max).exp();
        }
        let total: f64 = alpha.iter().sum();
        alpha.iter_mut().for_each(|a| *a /= total);

        let mut mu = [0.0; CLASSICAL_MODES];
        mu.copy_from_slice(&out[CLASSICAL_MODES..2 * CLASSICAL_MODES]);

        let mut sigma = [0.0; CLASSICAL_MODES];
        let mut sigma_active = [true; CLASSICAL_MODES];
        for i in 0..CLASSICAL_MODES {
            let raw = out[2 * CLASSICAL_MODES + i];
            let s = self.norm.sigma_scale * raw.min(LOG_SIGMA_MAX).exp();
            sigma_active[i] = raw <= LOG_SIGMA_MAX && s >= SIGMA_FLOOR;
            sigma[i] = s.max(SIGMA_FLOOR);
        }

        let mixture = GaussianMixture::new(alpha.to_vec(), mu.to_vec(), sigma.to_vec())
            .expect("softmax weights and floored sigmas form a valid mixture");
        Forward {
            hidden,
            alpha,
            sigma,
            sigma_active,
            mixture,
        }
    }
}

impl ConditionalDensity for ClassicalMdn {
    fn mixture(&self, x: f64) -> GaussianMixture {
        self.forward(x).mixture
    }
}

impl MixtureModel for ClassicalMdn {
    fn kind(&self) -> ModelKind {
        ModelKind::Mdn
    }

    fn params(&self) -> &[f64] {
        &self.params
    }

    fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn normalization(&self) -> &Normalization {
        &self.norm
    }

    fn set_normalization(&mut self, norm: Normalization) {
        self.norm = norm;
    }

    fn accumulate_gradient(&self, x: f64, y: f64, weight: f64, grad: &mut [f64]) -> f64 {
        assert_eq!(grad.len(), CLASSICAL_PARAM_COUNT, "gradient buffer length");
        let fwd = self.forward(x);
        let g = fwd.mixture.nll_gradient(y);

        // d loss / d output layer
        let mut d_out = [0.0; OUTPUTS];
        let dot: f64 = fwd.alpha.iter().zip(&g.weights).map(|(a, w)| a * w).sum();
        for i in 0..CLASSICAL_MODES {
            d_out[i] = fwd.alpha[i] * (g.weights[i] - dot);
            d_out[CLASSICAL_MODES + i] = g.means[i];
            if fwd.sigma_active[i] {
                d_out[2 * CLASSICAL_MODES + i] = g.stds[i] * fwd.sigma[i];
            }
        }

        let t = self.norm.scale_x(x);
        let p = &self.params;
        let mut d_hidden = [0.0; CLASSICAL_HIDDEN];
        for (k, &d) in d_out.iter().enumerate() {
            let d = weight * d;
            grad[B2 + k] += d;
            for j in 0..CLASSICAL_HIDDEN {
                grad[W2 + k * CLASSICAL_HIDDEN + j] += d * fwd.hidden[j];
                d_hidden[j] += d * p[W2 + k * CLASSICAL_HIDDEN + j];
            }
        }
        for j in 0..CLASSICAL_HIDDEN {
            let d_pre = d_hidden[j] * (1.0 - fwd.hidden[j] * fwd.hidden[j]);
            grad[W1 + j] += d_pre * t;
            grad[B1 + j] += d_pre;
        }
        g.loss
    }
}
