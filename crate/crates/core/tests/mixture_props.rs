use proptest::prelude::*;
use qmdn::mixture::{
    mixture_from_state_probs, normal_density, GaussianMixture, StateProbMapping, SIGMA_FLOOR,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn simplex(raw: &[f64]) -> Vec<f64> {
    let s: f64 = raw.iter().sum();
    raw.iter().map(|r| r / s).collect()
}

/// Direct sum of weighted densities, no log-space tricks.
fn naive_nll(gm: &GaussianMixture, y: f64) -> f64 {
    let p: f64 = gm
        .weights()
        .iter()
        .zip(gm.means())
        .zip(gm.stds())
        .map(|((w, m), s)| w * (-(y - m).powi(2) / (2.0 * s * s)).exp() / (s * (2.0 * std::f64::consts::PI).sqrt()))
        .sum();
    -p.ln()
}

#[test]
fn uniform_probabilities_decode_to_the_symmetric_mixture() {
    let u = [0.125; 8];
    let m = StateProbMapping::new(&u, &u, &u, 1.0).unwrap();
    for i in 0..7 {
        assert_eq!(m.alpha()[i], 1.0 / 7.0);
        assert_eq!(m.mu()[i], 0.0);
        assert_eq!(m.sigma()[i], 1.0);
    }
}

proptest! {
    #[test]
    fn weights_form_a_simplex(
        a in prop::collection::vec(0.01f64..1.0, 8),
        m in prop::collection::vec(0.01f64..1.0, 8),
        s in prop::collection::vec(0.01f64..1.0, 8),
        scale in 0.01f64..10.0,
    ) {
        let gm = mixture_from_state_probs(&simplex(&a), &simplex(&m), &simplex(&s), scale).unwrap();
        let total: f64 = gm.weights().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
        prop_assert!(gm.weights().iter().all(|w| *w >= 0.0));
        prop_assert!(gm.stds().iter().all(|s| *s >= SIGMA_FLOOR));
    }

    // Ratios are invariant to a common rescaling of the mean and width heads.
    #[test]
    fn ratio_maps_are_scale_invariant(
        m in prop::collection::vec(0.001f64..0.1, 8),
        s in prop::collection::vec(0.001f64..0.1, 8),
        c in 0.1f64..10.0,
    ) {
        let a = [0.125; 8];
        let base = StateProbMapping::new_unchecked(&a, &m, &s, 1.0);
        let ms: Vec<f64> = m.iter().map(|v| v * c).collect();
        let ss: Vec<f64> = s.iter().map(|v| v * c).collect();
        let scaled = StateProbMapping::new_unchecked(&a, &ms, &ss, 1.0);
        for i in 0..7 {
            prop_assert!((base.mu()[i] - scaled.mu()[i]).abs() < 1e-12);
            prop_assert!((base.sigma()[i] - scaled.sigma()[i]).abs() < 1e-12 * base.sigma()[i].max(1.0));
        }
    }

    #[test]
    fn stable_nll_matches_naive_on_benign_mixtures(
        w in prop::collection::vec(0.05f64..1.0, 1..6),
        seed in any::<u64>(),
        y in -3.0f64..3.0,
    ) {
        let k = w.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        use rand::Rng;
        let means: Vec<f64> = (0..k).map(|_| rng.random_range(-2.0..2.0)).collect();
        let stds: Vec<f64> = (0..k).map(|_| rng.random_range(0.3..2.0)).collect();
        let gm = GaussianMixture::new(simplex(&w), means, stds).unwrap();
        prop_assert!((-gm.log_pdf(y) - naive_nll(&gm, y)).abs() < 1e-10);
    }

    #[test]
    fn nll_is_finite_at_the_sigma_floor(mu in -5.0f64..5.0, dy in -10.0f64..10.0) {
        let gm = GaussianMixture::new(vec![0.5, 0.5], vec![mu, mu + 1.0], vec![SIGMA_FLOOR, SIGMA_FLOOR]).unwrap();
        let nll = -gm.log_pdf(mu + dy);
        prop_assert!(nll.is_finite());
        let g = gm.nll_gradient(mu + dy);
        prop_assert!(g.loss.is_finite());
    }
}

#[test]
fn monte_carlo_entropy_matches_quadrature() {
    let gm = GaussianMixture::new(vec![0.3, 0.7], vec![-1.0, 1.5], vec![0.4, 0.8]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 200_000;
    let mc = (0..n).map(|_| -gm.log_pdf(gm.sample(&mut rng))).sum::<f64>() / n as f64;
    // quadrature of -p ln p over a wide grid
    let (lo, hi, steps) = (-8.0, 10.0, 20_000);
    let h = (hi - lo) / steps as f64;
    let exact: f64 = (0..=steps)
        .map(|i| {
            let y = lo + i as f64 * h;
            let p = gm.pdf(y);
            let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
            if p > 0.0 { -w * h * p * p.ln() } else { 0.0 }
        })
        .sum();
    assert!((mc - exact).abs() < 0.01, "mc {mc} vs quadrature {exact}");
}

#[test]
fn single_component_density_is_the_normal_density() {
    let gm = GaussianMixture::new(vec![1.0], vec![0.3], vec![0.7]).unwrap();
    for y in [-2.0, 0.0, 0.3, 1.9] {
        assert!((gm.pdf(y) - normal_density(y, 0.3, 0.7)).abs() < 1e-15);
    }
}
