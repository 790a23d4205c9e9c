use qmdn::data::{double_slit_pdf, DoubleSlitTruth};
use qmdn::eval::{density_grid, detect_modes, kl_to_truth, linspace, trapezoid, MODE_THRESHOLD};
use qmdn::mixture::GaussianMixture;
use qmdn::models::ConditionalDensity;

const STEP: f64 = 6.0 / 1000.0;

#[test]
fn five_interference_modes_at_zero() {
    let curve = density_grid(&DoubleSlitTruth, 0.0, -3.0, 3.0, 1001).unwrap();
    let modes = detect_modes(&curve, MODE_THRESHOLD).unwrap();
    assert_eq!(modes.len(), 5);
    for (m, target) in modes.iter().zip([-2.0, -1.0, 0.0, 1.0, 2.0]) {
        assert!((m.y - target).abs() <= STEP + 1e-12, "{} vs {target}", m.y);
    }
}

#[test]
fn two_slit_modes_when_collapsed() {
    let curve = density_grid(&DoubleSlitTruth, 1.0, -3.0, 3.0, 1001).unwrap();
    let modes = detect_modes(&curve, MODE_THRESHOLD).unwrap();
    assert_eq!(modes.len(), 2);
    assert!((modes[0].y + 1.0).abs() <= STEP + 1e-12);
    assert!((modes[1].y - 1.0).abs() <= STEP + 1e-12);
}

#[test]
fn truth_integrates_to_one() {
    let ys = linspace(-6.0, 6.0, 24_001);
    for x in [0.0, 0.4, 1.0] {
        let p: Vec<f64> = ys.iter().map(|&y| double_slit_pdf(x, y).unwrap()).collect();
        assert!((trapezoid(&ys, &p) - 1.0).abs() < 1e-6);
    }
}

struct Wide;

impl ConditionalDensity for Wide {
    fn mixture(&self, _x: f64) -> GaussianMixture {
        GaussianMixture::new(vec![0.5, 0.5], vec![-1.0, 1.0], vec![0.6, 0.6]).unwrap()
    }
}

#[test]
fn kl_is_stable_under_grid_refinement() {
    for x in [0.0, 0.4, 1.0] {
        let coarse = kl_to_truth(&Wide, x, &linspace(-3.0, 3.0, 1001)).unwrap();
        let fine = kl_to_truth(&Wide, x, &linspace(-3.0, 3.0, 4001)).unwrap();
        assert!(coarse > 0.0);
        assert!((coarse - fine).abs() < 1e-3 * coarse.max(1.0), "{coarse} vs {fine}");
    }
}
