mod common;

use std::f64::consts::PI;

use proptest::prelude::*;
use qmdn::qsim::{circuit_gradient, run_circuit, CircuitSpec, Entangler, StateVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{central_diff, dense_probabilities, max_rel_err};

fn random_angles(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-PI..PI)).collect()
}

#[test]
fn matches_dense_unitary_at_fixed_embedding() {
    let spec = CircuitSpec::default_qmdn();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let params = random_angles(&mut rng, spec.param_count());
    let fast = run_circuit(&spec, &params, 0.7).unwrap();
    let dense = dense_probabilities(3, 4, spec.entangler(), &params, 0.7);
    for (a, b) in fast.iter().zip(&dense) {
        assert!((a - b).abs() < 1e-10, "{fast:?} vs {dense:?}");
    }
}

#[test]
fn matches_dense_unitary_for_other_shapes() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for (n, layers, ent) in [(1, 2, Entangler::Ring), (2, 3, Entangler::Ring), (3, 2, Entangler::Chain)] {
        let spec = CircuitSpec::with_entangler(n, layers, ent).unwrap();
        let params = random_angles(&mut rng, spec.param_count());
        let x = rng.random_range(0.0..PI);
        let fast = run_circuit(&spec, &params, x).unwrap();
        let dense = dense_probabilities(n, layers, spec.entangler(), &params, x);
        for (a, b) in fast.iter().zip(&dense) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}

#[test]
fn gradient_matches_finite_differences_for_one_hot_cotangent() {
    let spec = CircuitSpec::default_qmdn();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..5 {
        let params = random_angles(&mut rng, spec.param_count());
        let x = rng.random_range(0.0..PI);
        let mut cot = vec![0.0; 8];
        cot[0] = 1.0;
        let g = circuit_gradient(&spec, &params, x, &cot).unwrap();
        let fd = central_diff(|p| run_circuit(&spec, p, x).unwrap()[0], &params, 1e-5);
        assert!(max_rel_err(&g, &fd) < 1e-4);
    }
}

#[test]
fn gradient_matches_finite_differences_for_general_functional() {
    let spec = CircuitSpec::default_qmdn();
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let params = random_angles(&mut rng, spec.param_count());
    let cot: Vec<f64> = (0..8).map(|_| rng.random_range(-2.0..2.0)).collect();
    let f = |p: &[f64]| -> f64 {
        run_circuit(&spec, p, 1.1)
            .unwrap()
            .iter()
            .zip(&cot)
            .map(|(a, b)| a * b)
            .sum()
    };
    let g = circuit_gradient(&spec, &params, 1.1, &cot).unwrap();
    assert_eq!(g.len(), 36);
    let fd = central_diff(f, &params, 1e-5);
    assert!(max_rel_err(&g, &fd) < 1e-4);
}

proptest! {
    #[test]
    fn norm_is_preserved(ops in prop::collection::vec((0usize..4, 0usize..3, 0usize..3, -7.0f64..7.0, -7.0f64..7.0, -7.0f64..7.0), 1..40)) {
        let mut s = StateVector::zero(3).unwrap();
        for (kind, a, b, t1, t2, t3) in ops {
            match kind {
                0 => s.apply_rx(a, t1).unwrap(),
                1 => s.apply_rot(a, t1, t2, t3).unwrap(),
                _ if a != b => s.apply_cnot(a, b).unwrap(),
                _ => {}
            }
            prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn circuit_output_is_a_distribution(params in prop::collection::vec(-10.0f64..10.0, 36), x in -5.0f64..5.0) {
        let p = run_circuit(&CircuitSpec::default_qmdn(), &params, x).unwrap();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        prop_assert!(p.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn zero_rot_preserves_probabilities(seed in any::<u64>(), q in 0usize..3) {
        let spec = CircuitSpec::default_qmdn();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = spec.state(&random_angles(&mut rng, 36), 0.3).unwrap();
        let before = s.probabilities();
        s.apply_rot(q, 0.0, 0.0, 0.0).unwrap();
        prop_assert_eq!(before, s.probabilities());
    }

    #[test]
    fn cnot_is_an_exact_involution(seed in any::<u64>(), c in 0usize..3, t in 0usize..3) {
        prop_assume!(c != t);
        let spec = CircuitSpec::default_qmdn();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s0 = spec.state(&random_angles(&mut rng, 36), 1.0).unwrap();
        let mut s = s0.clone();
        s.apply_cnot(c, t).unwrap();
        s.apply_cnot(c, t).unwrap();
        prop_assert_eq!(s, s0);
    }
}
