//! End-to-end NLL gradients of both model families against central
//! differences of the scalar per-sample loss.
mod common;

use qmdn::mixture::GaussianMixture;
use qmdn::models::{ClassicalMdn, ConditionalDensity, MixtureModel, Normalization, QMdn};
use qmdn::qsim::CircuitSpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;

use common::{central_diff, max_rel_err};

fn loss_at<M: MixtureModel + Clone>(model: &M, params: &[f64], x: f64, y: f64) -> f64 {
    let mut m = model.clone();
    m.params_mut().copy_from_slice(params);
    -m.mixture(x).log_pdf(y)
}

fn random_norm(rng: &mut ChaCha8Rng) -> Normalization {
    Normalization {
        x_min: rng.random_range(-1.0..0.0),
        x_max: rng.random_range(1.0..2.0),
        sigma_scale: rng.random_range(0.2..1.0),
    }
}

#[test]
fn classical_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let normal = Normal::new(0.0, 0.5).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let params: Vec<f64> = (0..100).map(|_| rng.sample(normal)).collect();
        let m = ClassicalMdn::from_params(params.clone(), random_norm(&mut rng)).unwrap();
        let x = rng.random_range(-1.0..2.0);
        let y = rng.random_range(-2.0..2.0);
        let (g, loss) = m.backward(x, y);
        assert!((loss - loss_at(&m, &params, x, y)).abs() < 1e-12);
        let fd = central_diff(|p| loss_at(&m, p, x, y), &params, 1e-5);
        worst = worst.max(max_rel_err(&g, &fd));
    }
    assert!(worst < 1e-6, "worst relative error {worst}");
}

#[test]
fn classical_gradient_in_degenerate_responsibility_regime() {
    // y far in the tail of every component except one
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let mut params: Vec<f64> = (0..100).map(|_| rng.random_range(-0.3..0.3)).collect();
    params[85 + 5] = 3.0; // mu_0 bias
    params[85 + 10] = -3.0; // log sigma_0 bias
    let m = ClassicalMdn::from_params(params.clone(), Normalization::default()).unwrap();
    let y = 3.0;
    let (g, _) = m.backward(0.4, y);
    let fd = central_diff(|p| loss_at(&m, p, 0.4, y), &params, 1e-5);
    assert!(max_rel_err(&g, &fd) < 1e-6);
}

#[test]
fn quantum_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let spec = CircuitSpec::default_qmdn();
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let params: Vec<f64> = (0..108).map(|_| rng.random_range(-3.0..3.0)).collect();
        let m = QMdn::new(spec.clone(), params.clone(), random_norm(&mut rng)).unwrap();
        let x = rng.random_range(0.0..1.0);
        let gm = m.mixture(x);
        // target near one of the predicted means keeps the loss well scaled
        let k = rng.random_range(0..7);
        let y = gm.means()[k] + rng.random_range(-1.0..1.0) * gm.stds()[k];
        let (g, _) = m.backward(x, y);
        let fd = central_diff(|p| loss_at(&m, p, x, y), &params, 1e-5);
        worst = worst.max(max_rel_err(&g, &fd));
    }
    assert!(worst < 1e-4, "worst relative error {worst}");
}

#[test]
fn alpha_head_gradient_only_sees_forward_outputs_of_other_heads() {
    // Perturbing the mu head changes the alpha-head gradient only through the
    // decoded mixture; recomputing by hand from cached probabilities agrees.
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let params: Vec<f64> = (0..108).map(|_| rng.random_range(-2.0..2.0)).collect();
    let m = QMdn::new(CircuitSpec::default_qmdn(), params, Normalization::default()).unwrap();
    let (x, y) = (0.3, 0.2);
    let (g, _) = m.backward(x, y);

    let [pa, pm, ps] = m.head_probabilities(x);
    let spec = m.spec().clone();
    let angle = m.embedding_angle(x);
    let alpha_loss = |alpha_angles: &[f64]| {
        let pa = qmdn::qsim::run_circuit(&spec, alpha_angles, angle).unwrap();
        let gm = qmdn::mixture::mixture_from_state_probs(&pa, &pm, &ps, 1.0).unwrap();
        -gm.log_pdf(y)
    };
    let fd = central_diff(alpha_loss, m.head(0), 1e-5);
    assert!(max_rel_err(&g[..36], &fd) < 1e-4);
    let _ = pa;
}

#[test]
fn mixture_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let k = rng.random_range(1..6);
        let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = w.iter().sum();
        let w: Vec<f64> = w.iter().map(|v| v / total).collect();
        let mu: Vec<f64> = (0..k).map(|_| rng.random_range(-2.0..2.0)).collect();
        let sd: Vec<f64> = (0..k).map(|_| rng.random_range(0.2..1.5)).collect();
        let y = rng.random_range(-3.0..3.0);
        let gm = GaussianMixture::new(w.clone(), mu.clone(), sd.clone()).unwrap();
        let g = gm.nll_gradient(y);

        // raw parameters, no renormalization: -ln sum_i a_i N(y; m_i, s_i)
        let naive = |a: &[f64], m: &[f64], s: &[f64]| -> f64 {
            let p: f64 = (0..k)
                .map(|i| a[i] * (-(y - m[i]).powi(2) / (2.0 * s[i] * s[i])).exp() / (s[i] * (2.0 * std::f64::consts::PI).sqrt()))
                .sum();
            -p.ln()
        };
        let fa = central_diff(|a| naive(a, &mu, &sd), &w, 1e-5);
        let fm = central_diff(|m| naive(&w, m, &sd), &mu, 1e-5);
        let fs = central_diff(|s| naive(&w, &mu, s), &sd, 1e-5);
        let analytic: Vec<f64> = g.weights.iter().chain(&g.means).chain(&g.stds).copied().collect();
        let numeric: Vec<f64> = fa.iter().chain(&fm).chain(&fs).copied().collect();
        worst = worst.max(max_rel_err(&analytic, &numeric));
    }
    assert!(worst < 1e-6, "worst relative error {worst}");
}
