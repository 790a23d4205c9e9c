use qmdn::data::{double_slit_mixture, gen_double_slit, gen_logistic};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

fn truth_cdf(x: f64, y: f64) -> f64 {
    let gm = double_slit_mixture(x).unwrap();
    gm.weights()
        .iter()
        .zip(gm.means())
        .zip(gm.stds())
        .map(|((w, m), s)| w * Normal::new(*m, *s).unwrap().cdf(y))
        .sum()
}

/// Kolmogorov-Smirnov distance of `u` from U(0, 1).
fn ks_uniform(mut u: Vec<f64>) -> f64 {
    u.sort_by(f64::total_cmp);
    let n = u.len() as f64;
    u.iter()
        .enumerate()
        .map(|(i, v)| (v - i as f64 / n).abs().max(((i + 1) as f64 / n - v).abs()))
        .fold(0.0, f64::max)
}

#[test]
fn double_slit_samples_follow_the_conditional_law() {
    let ds = gen_double_slit(20_000, &mut ChaCha8Rng::seed_from_u64(1), Some(1)).unwrap();
    // probability integral transform: F(y | x) is uniform under the truth
    let u: Vec<f64> = ds.pairs().iter().map(|&(x, y)| truth_cdf(x, y)).collect();
    let d = ks_uniform(u);
    let critical = 1.63 / (20_000f64).sqrt(); // 1% level
    assert!(d < critical, "KS distance {d} >= {critical}");
}

#[test]
fn double_slit_inputs_are_uniform() {
    let ds = gen_double_slit(20_000, &mut ChaCha8Rng::seed_from_u64(2), Some(2)).unwrap();
    let xs = ds.xs();
    assert!(xs.iter().all(|x| (0.0..1.0).contains(x)));
    // chi-squared over 10 equal bins, 1% critical value for 9 dof is 21.67
    let mut counts = [0.0f64; 10];
    for x in &xs {
        counts[(x * 10.0) as usize] += 1.0;
    }
    let expected = xs.len() as f64 / 10.0;
    let chi2: f64 = counts.iter().map(|c| (c - expected).powi(2) / expected).sum();
    assert!(chi2 < 21.67, "chi2 {chi2}");
}

#[test]
fn collapsed_end_has_two_narrow_slits() {
    let ds = gen_double_slit(20_000, &mut ChaCha8Rng::seed_from_u64(3), Some(3)).unwrap();
    let slice: Vec<f64> = ds.pairs().iter().filter(|p| p.0 > 0.97).map(|p| p.1).collect();
    assert!(slice.len() > 400);
    let n = slice.len() as f64;
    let mean_abs = slice.iter().map(|y| y.abs()).sum::<f64>() / n;
    let mean = slice.iter().sum::<f64>() / n;
    assert!((mean_abs - 1.0).abs() < 0.05, "mean |y| {mean_abs}");
    assert!(mean.abs() < 0.1, "mean {mean}");
    let near_centre = slice.iter().filter(|y| y.abs() < 0.4).count() as f64 / n;
    assert!(near_centre < 0.05, "{near_centre}");
}

#[test]
fn logistic_data_shape_and_fixed_point() {
    let ds = gen_logistic(150, 100).unwrap();
    assert_eq!(ds.len(), 15_000);
    assert!(ds.ys().iter().all(|y| (0.0..=1.0).contains(y)));
    // below the first bifurcation the orbit settles on 1 - 1/r
    let r = 2.6;
    let tail: Vec<f64> = ds
        .pairs()
        .iter()
        .filter(|p| (p.0 - r).abs() < 1e-9)
        .map(|p| p.1)
        .skip(50)
        .collect();
    assert_eq!(tail.len(), 50);
    assert!(tail.iter().all(|y| (y - (1.0 - 1.0 / r)).abs() < 1e-6));
}
