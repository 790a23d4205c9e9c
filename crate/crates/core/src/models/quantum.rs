use std::f64::consts::PI;

use rand::Rng;

use super::{init_params, ConditionalDensity, MixtureModel, ModelKind, Normalization};
use crate::mixture::{GaussianMixture, StateProbMapping};
use crate::qsim::{self, CircuitSpec};

/// Three heads of `3 * 3 * 4 = 36` angles.
pub const QMDN_PARAM_COUNT: usize = 108;

/// Quantum MDN: three circuits sharing one [`CircuitSpec`] whose output
/// probabilities decode into mixture weights, means and widths.
///
/// Parameters are stored flat as `[alpha head | mu head | sigma head]`. The
/// input is scaled to `t` in `[0, 1]` and embedded as `Rx(pi * t)` on every
/// wire of every head.
#[derive(Debug, Clone, PartialEq)]
pub struct QMdn {
    spec: CircuitSpec,
    params: Vec<f64>,
    norm: Normalization,
}

/// Cached forward pass: the three final states and the decoded mixture.
pub(crate) struct QForward {
    states: [qsim::StateVector; 3],
    mapping: StateProbMapping,
}

impl QMdn {
    pub fn new(spec: CircuitSpec, params: Vec<f64>, norm: Normalization) -> crate::Result<Self> {
        let expected = 3 * spec.param_count();
        if params.len() != expected {
            return Err(crate::Error::LengthMismatch {
                what: "Q-MDN parameters",
                expected,
                actual: params.len(),
            });
        }
        Ok(Self { spec, params, norm })
    }

    pub fn zeros() -> Self {
        let spec = CircuitSpec::default_qmdn();
        let params = vec![0.0; 3 * spec.param_count()];
        Self {
            spec,
            params,
            norm: Normalization::default(),
        }
    }

    pub fn init<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self::init_with_spec(CircuitSpec::default_qmdn(), rng)
    }

    pub fn init_with_spec<R: Rng + ?Sized>(spec: CircuitSpec, rng: &mut R) -> Self {
        let params = init_params(rng, 3 * spec.param_count());
        Self {
            spec,
            params,
            norm: Normalization::default(),
        }
    }

    pub fn spec(&self) -> &CircuitSpec {
        &self.spec
    }

    /// Angles of head `h` (0 = alpha, 1 = mu, 2 = sigma).
    pub fn head(&self, h: usize) -> &[f64] {
        let n = self.spec.param_count();
        &self.params[h * n..(h + 1) * n]
    }

    pub fn embedding_angle(&self, x: f64) -> f64 {
        PI * self.norm.scale_x(x)
    }

    /// Output probabilities of the three heads at `x`.
    pub fn head_probabilities(&self, x: f64) -> [Vec<f64>; 3] {
        let angle = self.embedding_angle(x);
        [0, 1, 2].map(|h| {
            qsim::run_circuit(&self.spec, self.head(h), angle).expect("head length matches spec")
        })
    }

    pub(crate) fn forward(&self, x: f64) -> QForward {
        let angle = self.embedding_angle(x);
        let states = [0, 1, 2]
            .map(|h| self.spec.state(self.head(h), angle).expect("head length matches spec"));
        let probs = states.each_ref().map(|s| s.probabilities());
        let mapping = StateProbMapping::new_unchecked(
            &probs[0],
            &probs[1],
            &probs[2],
            self.norm.sigma_scale,
        );
        QForward { states, mapping }
    }
}

impl ConditionalDensity for QMdn {
    fn mixture(&self, x: f64) -> GaussianMixture {
        self.forward(x)
            .mapping
            .mixture()
            .expect("decoded state probabilities form a valid mixture")
    }
}

impl MixtureModel for QMdn {
    fn kind(&self) -> ModelKind {
        ModelKind::Qmdn
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
        assert_eq!(grad.len(), self.params.len(), "gradient buffer length");
        let QForward { states, mapping } = self.forward(x);
        let gm = mapping
            .mixture()
            .expect("decoded state probabilities form a valid mixture");
        let g = gm.nll_gradient(y);
        let cotangents = mapping.pullback(&g);
        let n = self.spec.param_count();
        for (h, (state, cot)) in states.into_iter().zip(cotangents).enumerate() {
            if cot.iter().all(|&c| c == 0.0) {
                continue;
            }
            let cot: Vec<f64> = cot.iter().map(|c| c * weight).collect();
            qsim::accumulate_gradient(
                &self.spec,
                self.head(h),
                state,
                &cot,
                &mut grad[h * n..(h + 1) * n],
            )
            .expect("buffers sized from spec");
        }
        g.loss
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parameter_count() {
        assert_eq!(QMdn::zeros().param_count(), QMDN_PARAM_COUNT);
        assert_eq!(
            QMdn::init(&mut ChaCha8Rng::seed_from_u64(0)).param_count(),
            108
        );
    }

    #[test]
    fn identity_circuits_give_degenerate_but_finite_mixture() {
        let gm = QMdn::zeros().mixture(0.0);
        assert_eq!(gm.n_components(), 7);
        assert!(gm.weights()[0] > 1.0 - 1e-8);
        assert!((gm.means()[0] - 1e10f64.ln()).abs() < 1e-6);
        assert!(gm.means().iter().chain(gm.stds()).all(|v| v.is_finite()));
    }

    #[test]
    fn fully_clamped_heads_have_zero_gradient() {
        // identity heads put all mass on |000>, so every other probability is
        // clamped and only the alpha head's first entry is free; the alpha map
        // is invariant to it when the rest are pinned
        let m = QMdn::zeros();
        let (g, loss) = m.backward(0.0, 0.3);
        assert!(loss.is_finite());
        assert!(g.iter().all(|v| *v == 0.0), "{g:?}");
    }
}
