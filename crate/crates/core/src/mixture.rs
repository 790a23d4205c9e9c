//! One-dimensional Gaussian mixtures, their negative log-likelihood, and the
//! map from basis-state probabilities to mixture parameters.

use std::f64::consts::PI;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Smallest standard deviation a mixture component may have.
pub const SIGMA_FLOOR: f64 = 1e-4;

/// Basis-state probabilities are clamped into `[PROB_CLAMP, 1]` before the
/// ratio maps, which bounds `|mu| <= ln(1e10) ~ 23`.
pub const PROB_CLAMP: f64 = 1e-10;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Numerically stable `ln(sum(exp(v)))`. Returns `-inf` for an empty slice or
/// when every entry is `-inf`.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max.is_infinite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// `ln N(y; mu, sigma)`.
pub fn log_normal_density(y: f64, mu: f64, sigma: f64) -> f64 {
    let z = (y - mu) / sigma;
    -0.5 * z * z - sigma.ln() - LN_SQRT_2PI
}

/// `N(y; mu, sigma)`.
pub fn normal_density(y: f64, mu: f64, sigma: f64) -> f64 {
    let z = (y - mu) / sigma;
    (-0.5 * z * z).exp() / (sigma * (2.0 * PI).sqrt())
}

/// A weighted sum of univariate Gaussians.
///
/// Weights lie on the simplex (within `1e-9`) and every standard deviation is
/// at least [`SIGMA_FLOOR`]; construction floors smaller values.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture {
    weights: Vec<f64>,
    means: Vec<f64>,
    stds: Vec<f64>,
}

/// Gradient of `-ln p(y)` with respect to the raw mixture parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct NllGradient {
    pub weights: Vec<f64>,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    /// Posterior component probabilities `gamma_i = alpha_i N_i / p(y)`.
    pub responsibilities: Vec<f64>,
    /// `-ln p(y)`.
    pub loss: f64,
}

impl GaussianMixture {
    pub fn new(weights: Vec<f64>, means: Vec<f64>, stds: Vec<f64>) -> Result<Self> {
        let k = weights.len();
        if k == 0 {
            return Err(Error::InvalidMixture("no components".into()));
        }
        if means.len() != k || stds.len() != k {
            return Err(Error::InvalidMixture(format!(
                "component arrays differ in length ({k}, {}, {})",
                means.len(),
                stds.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(0.0..=1.0).contains(*w)) {
            return Err(Error::InvalidMixture(format!("weight {w} outside [0, 1]")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidMixture(format!("weights sum to {total}")));
        }
        if means.iter().chain(&stds).any(|v| !v.is_finite()) {
            return Err(Error::InvalidMixture("non-finite mean or std".into()));
        }
        if let Some(s) = stds.iter().find(|s| **s <= 0.0) {
            return Err(Error::InvalidMixture(format!("non-positive std {s}")));
        }
        let stds = stds.into_iter().map(|s| s.max(SIGMA_FLOOR)).collect();
        Ok(Self {
            weights,
            means,
            stds,
        })
    }

    pub fn n_components(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn stds(&self) -> &[f64] {
        &self.stds
    }

    pub fn pdf(&self, y: f64) -> f64 {
        self.weights
            .iter()
            .zip(&self.means)
            .zip(&self.stds)
            .map(|((a, m), s)| a * normal_density(y, *m, *s))
            .sum()
    }

    fn component_log_terms(&self, y: f64) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.means)
            .zip(&self.stds)
            .map(|((a, m), s)| a.ln() + log_normal_density(y, *m, *s))
            .collect()
    }

    /// `ln p(y)` via log-sum-exp over components.
    pub fn log_pdf(&self, y: f64) -> f64 {
        log_sum_exp(&self.component_log_terms(y))
    }

    pub fn responsibilities(&self, y: f64) -> Vec<f64> {
        let terms = self.component_log_terms(y);
        let lse = log_sum_exp(&terms);
        terms.iter().map(|t| (t - lse).exp()).collect()
    }

    /// Exact partial derivatives of `-ln p(y)`.
    pub fn nll_gradient(&self, y: f64) -> NllGradient {
        let terms = self.component_log_terms(y);
        let log_p = log_sum_exp(&terms);
        let k = self.n_components();
        let mut g = NllGradient {
            weights: Vec::with_capacity(k),
            means: Vec::with_capacity(k),
            stds: Vec::with_capacity(k),
            responsibilities: Vec::with_capacity(k),
            loss: -log_p,
        };
        for i in 0..k {
            let (m, s) = (self.means[i], self.stds[i]);
            let gamma = (terms[i] - log_p).exp();
            let z = (y - m) / s;
            // dL/dalpha_i = -N_i / p, which stays finite when alpha_i = 0
            g.weights
                .push(-(log_normal_density(y, m, s) - log_p).exp());
            g.means.push(-gamma * z / s);
            g.stds.push(gamma * (1.0 - z * z) / s);
            g.responsibilities.push(gamma);
        }
        g
    }

    /// Picks a component by weight, then draws from that Gaussian.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let index = WeightedIndex::new(&self.weights)
            .expect("mixture weights are a valid distribution")
            .sample(rng);
        let z: f64 = rng.sample(StandardNormal);
        self.means[index] + self.stds[index] * z
    }
}

/// Batch-mean negative log-likelihood.
pub fn nll(mixtures: &[GaussianMixture], ys: &[f64]) -> Result<f64> {
    if mixtures.is_empty() {
        return Err(Error::Empty);
    }
    if mixtures.len() != ys.len() {
        return Err(Error::LengthMismatch {
            what: "targets",
            expected: mixtures.len(),
            actual: ys.len(),
        });
    }
    let total: f64 = mixtures.iter().zip(ys).map(|(gm, &y)| gm.log_pdf(y)).sum();
    Ok(-total / mixtures.len() as f64)
}

fn check_simplex(what: &'static str, p: &[f64], dim: usize) -> Result<()> {
    if p.len() != dim {
        return Err(Error::LengthMismatch {
            what,
            expected: dim,
            actual: p.len(),
        });
    }
    if let Some(v) = p.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
        return Err(Error::NotASimplex {
            what,
            reason: format!("entry {v} is negative or not finite"),
        });
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::NotASimplex {
            what,
            reason: format!("entries sum to {total}"),
        });
    }
    Ok(())
}

/// Mixture parameters decoded from three probability vectors of length `2^n`.
///
/// With `L` the last basis state and `p~` the clamped probabilities:
///
/// * `mu_i    = ln(p~_i / p~_L)`
/// * `sigma_i = scale * p~_i / p~_L`
/// * `alpha_i = p~_i / sum_{j<L} p~_j`, which equals `p_i / (1 - p_L)` on the simplex
///
/// for `i` in `0..L`, giving `2^n - 1` components. The struct keeps what the
/// backward pass needs.
#[derive(Debug, Clone)]
pub struct StateProbMapping {
    alpha: Vec<f64>,
    mu: Vec<f64>,
    sigma: Vec<f64>,
    alpha_clamped: Vec<bool>,
    mu_p: Vec<f64>,
    mu_clamped: Vec<bool>,
    sigma_p: Vec<f64>,
    sigma_clamped: Vec<bool>,
    sigma_floored: Vec<bool>,
    alpha_sum: f64,
    sigma_scale: f64,
}

fn clamp_probs(p: &[f64]) -> (Vec<f64>, Vec<bool>) {
    p.iter()
        .map(|&v| {
            if v < PROB_CLAMP {
                (PROB_CLAMP, true)
            } else if v > 1.0 {
                (1.0, true)
            } else {
                (v, false)
            }
        })
        .unzip()
}

impl StateProbMapping {
    /// Applies the ratio maps without checking the simplex precondition.
    pub fn new_unchecked(p_alpha: &[f64], p_mu: &[f64], p_sigma: &[f64], sigma_scale: f64) -> Self {
        let last = p_alpha.len() - 1;
        let (pa, alpha_clamped) = clamp_probs(p_alpha);
        let (pm, mu_clamped) = clamp_probs(p_mu);
        let (ps, sigma_clamped) = clamp_probs(p_sigma);

        let alpha_sum: f64 = pa[..last].iter().sum();
        let alpha = pa[..last].iter().map(|v| v / alpha_sum).collect();
        let mu = pm[..last].iter().map(|v| (v / pm[last]).ln()).collect();
        let raw_sigma: Vec<f64> = ps[..last]
            .iter()
            .map(|v| sigma_scale * v / ps[last])
            .collect();
        let sigma_floored = raw_sigma.iter().map(|s| *s < SIGMA_FLOOR).collect();
        let sigma = raw_sigma.iter().map(|s| s.max(SIGMA_FLOOR)).collect();
        Self {
            alpha,
            mu,
            sigma,
            alpha_clamped,
            mu_p: pm,
            mu_clamped,
            sigma_p: ps,
            sigma_clamped,
            sigma_floored,
            alpha_sum,
            sigma_scale,
        }
    }

    pub fn new(p_alpha: &[f64], p_mu: &[f64], p_sigma: &[f64], sigma_scale: f64) -> Result<Self> {
        let dim = p_alpha.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "state probability vectors need length 2^n >= 2, got {dim}"
            )));
        }
        if !(sigma_scale > 0.0 && sigma_scale.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "sigma scale must be positive, got {sigma_scale}"
            )));
        }
        check_simplex("alpha probabilities", p_alpha, dim)?;
        check_simplex("mu probabilities", p_mu, dim)?;
        check_simplex("sigma probabilities", p_sigma, dim)?;
        Ok(Self::new_unchecked(p_alpha, p_mu, p_sigma, sigma_scale))
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn mixture(&self) -> Result<GaussianMixture> {
        GaussianMixture::new(self.alpha.clone(), self.mu.clone(), self.sigma.clone())
    }

    /// Pulls a mixture-parameter gradient back to cotangents on the three
    /// probability vectors. Clamped probabilities and floored sigmas pass no
    /// gradient.
    pub fn pullback(&self, g: &NllGradient) -> [Vec<f64>; 3] {
        let k = self.alpha.len();
        let dim = k + 1;

        let mut ca = vec![0.0; dim];
        let dot: f64 = self.alpha.iter().zip(&g.weights).map(|(a, w)| a * w).sum();
        for i in 0..k {
            if !self.alpha_clamped[i] {
                ca[i] = (g.weights[i] - dot) / self.alpha_sum;
            }
        }

        let mut cm = vec![0.0; dim];
        let mut last = 0.0;
        for i in 0..k {
            if !self.mu_clamped[i] {
                cm[i] = g.means[i] / self.mu_p[i];
            }
            last -= g.means[i];
        }
        if !self.mu_clamped[k] {
            cm[k] = last / self.mu_p[k];
        }

        let mut cs = vec![0.0; dim];
        let p_last = self.sigma_p[k];
        let mut last = 0.0;
        for i in 0..k {
            if self.sigma_floored[i] {
                continue;
            }
            if !self.sigma_clamped[i] {
                cs[i] = g.stds[i] * self.sigma_scale / p_last;
            }
            last -= g.stds[i] * self.sigma[i] / p_last;
        }
        if !self.sigma_clamped[k] {
            cs[k] = last;
        }
        [ca, cm, cs]
    }
}

/// Decodes three basis-state probability vectors into a mixture with
/// `2^n - 1` components. `sigma_scale` converts the raw sigma ratio into data
/// units.
pub fn mixture_from_state_probs(
    p_alpha: &[f64],
    p_mu: &[f64],
    p_sigma: &[f64],
    sigma_scale: f64,
) -> Result<GaussianMixture> {
    StateProbMapping::new(p_alpha, p_mu, p_sigma, sigma_scale)?.mixture()
}
