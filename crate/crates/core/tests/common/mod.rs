//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;

type CMat = DMatrix<Complex64>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn mat2(entries: [[Complex64; 2]; 2]) -> CMat {
    CMat::from_row_slice(2, 2, &[entries[0][0], entries[0][1], entries[1][0], entries[1][1]])
}

fn identity2() -> CMat {
    CMat::identity(2, 2)
}

/// `I (x) ... (x) g (x) ... (x) I` with qubit 0 as the leftmost factor.
fn embed(n: usize, qubit: usize, g: &CMat) -> CMat {
    let mut out = CMat::identity(1, 1);
    for q in 0..n {
        let f = if q == qubit { g.clone() } else { identity2() };
        out = out.kronecker(&f);
    }
    out
}

/// `|0><0|_c (x) I + |1><1|_c (x) X_t`, expanded by Kronecker products.
fn cnot(n: usize, control: usize, target: usize) -> CMat {
    let p0 = mat2([[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, 0.0)]]);
    let p1 = mat2([[c(0.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]]);
    let x = mat2([[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]]);
    let mut a = CMat::identity(1, 1);
    let mut b = CMat::identity(1, 1);
    for q in 0..n {
        let (fa, fb) = if q == control {
            (p0.clone(), p1.clone())
        } else if q == target {
            (identity2(), x.clone())
        } else {
            (identity2(), identity2())
        };
        a = a.kronecker(&fa);
        b = b.kronecker(&fb);
    }
    a + b
}

fn rx(t: f64) -> CMat {
    let (s, co) = (t / 2.0).sin_cos();
    mat2([[c(co, 0.0), c(0.0, -s)], [c(0.0, -s), c(co, 0.0)]])
}

fn ry(t: f64) -> CMat {
    let (s, co) = (t / 2.0).sin_cos();
    mat2([[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]])
}

fn rz(t: f64) -> CMat {
    mat2([
        [Complex64::from_polar(1.0, -t / 2.0), c(0.0, 0.0)],
        [c(0.0, 0.0), Complex64::from_polar(1.0, t / 2.0)],
    ])
}

/// Full circuit unitary: embedding, then per layer `Rz(omega) Ry(theta) Rz(phi)`
/// on each qubit followed by the CNOT list.
pub fn dense_unitary(
    n: usize,
    layers: usize,
    entangler: &[(usize, usize)],
    params: &[f64],
    x_angle: f64,
) -> CMat {
    let dim = 1 << n;
    let mut u = CMat::identity(dim, dim);
    for q in 0..n {
        u = embed(n, q, &rx(x_angle)) * u;
    }
    for l in 0..layers {
        for q in 0..n {
            let i = (l * n + q) * 3;
            let r = rz(params[i + 2]) * ry(params[i + 1]) * rz(params[i]);
            u = embed(n, q, &r) * u;
        }
        for &(ctl, tgt) in entangler {
            u = cnot(n, ctl, tgt) * u;
        }
    }
    u
}

/// Output probabilities: `|U e_0|^2`.
pub fn dense_probabilities(
    n: usize,
    layers: usize,
    entangler: &[(usize, usize)],
    params: &[f64],
    x_angle: f64,
) -> Vec<f64> {
    let u = dense_unitary(n, layers, entangler, params, x_angle);
    (0..1 << n).map(|i| u[(i, 0)].norm_sqr()).collect()
}

/// Central differences of `f` at `x` with step `h`.
pub fn central_diff(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut p = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = p[i];
            p[i] = orig + h;
            let up = f(&p);
            p[i] = orig - h;
            let down = f(&p);
            p[i] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Largest relative error between two gradients. Components are compared
/// relative to the gradient's overall scale so that entries that are
/// essentially zero do not blow up the ratio.
pub fn max_rel_err(analytic: &[f64], numeric: &[f64]) -> f64 {
    let scale = numeric
        .iter()
        .chain(analytic)
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1e-8);
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).abs() / scale)
        .fold(0.0, f64::max)
}
