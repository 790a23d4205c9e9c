//! Post-training analysis: density curves, mode counting, KL divergence to
//! the double-slit truth, held-out NLL and prediction sampling.

use std::collections::BTreeMap;

use rand::Rng;

use crate::data::{double_slit_pdf, Benchmark, Dataset, DatasetMeta};
use crate::error::{Error, Result};
use crate::models::ConditionalDensity;

/// Default relative height below which a local maximum is not a mode.
pub const MODE_THRESHOLD: f64 = 0.05;
pub const DEFAULT_GRID_POINTS: usize = 1001;
/// Densities are floored at this value inside the KL integrand.
pub const KL_DENSITY_FLOOR: f64 = 1e-12;

/// Evaluation grid and the conditioning values of the published figures.
pub fn default_grid(benchmark: Benchmark) -> (f64, f64, usize) {
    match benchmark {
        Benchmark::DoubleSlit => (-3.0, 3.0, DEFAULT_GRID_POINTS),
        Benchmark::Logistic => (0.0, 1.0, DEFAULT_GRID_POINTS),
    }
}

pub fn figure_xs(benchmark: Benchmark) -> &'static [f64] {
    match benchmark {
        Benchmark::DoubleSlit => &[0.0, 0.4, 1.0],
        Benchmark::Logistic => &[2.6, 3.3, 3.5, 3.9],
    }
}

/// `n_points` evenly spaced values from `min` to `max` inclusive.
pub fn linspace(min: f64, max: f64, n_points: usize) -> Vec<f64> {
    let step = (max - min) / (n_points - 1) as f64;
    (0..n_points).map(|i| min + i as f64 * step).collect()
}

/// Trapezoidal rule over a (not necessarily even) grid.
pub fn trapezoid(ys: &[f64], values: &[f64]) -> f64 {
    ys.windows(2)
        .zip(values.windows(2))
        .map(|(y, v)| 0.5 * (y[1] - y[0]) * (v[0] + v[1]))
        .sum()
}

/// A conditional density sampled on an ascending grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityCurve {
    pub x: f64,
    pub ys: Vec<f64>,
    pub densities: Vec<f64>,
}

impl DensityCurve {
    pub fn integral(&self) -> f64 {
        trapezoid(&self.ys, &self.densities)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("y,density\n");
        for (y, d) in self.ys.iter().zip(&self.densities) {
            out.push_str(&format!("{y:.16e},{d:.16e}\n"));
        }
        out
    }
}

pub fn density_grid(
    model: &dyn ConditionalDensity,
    x: f64,
    y_min: f64,
    y_max: f64,
    n_points: usize,
) -> Result<DensityCurve> {
    if n_points < 2 || !(y_min < y_max) {
        return Err(Error::InvalidArgument(format!(
            "density grid needs n_points >= 2 and y_min < y_max (got {n_points}, [{y_min}, {y_max}])"
        )));
    }
    let gm = model.mixture(x);
    let ys = linspace(y_min, y_max, n_points);
    let densities = ys.iter().map(|&y| gm.pdf(y)).collect();
    Ok(DensityCurve { x, ys, densities })
}

/// A detected local maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub y: f64,
    pub height: f64,
}

/// Strict interior local maxima at least `rel_threshold` times the curve's
/// global maximum. Endpoints never count.
pub fn detect_modes(curve: &DensityCurve, rel_threshold: f64) -> Result<Vec<Mode>> {
    if !(rel_threshold > 0.0 && rel_threshold < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "mode threshold must lie in (0, 1), got {rel_threshold}"
        )));
    }
    let d = &curve.densities;
    let max = d.iter().copied().fold(0.0, f64::max);
    let cutoff = rel_threshold * max;
    Ok((1..d.len().saturating_sub(1))
        .filter(|&i| d[i] > d[i - 1] && d[i] > d[i + 1] && d[i] >= cutoff && d[i] > 0.0)
        .map(|i| Mode {
            y: curve.ys[i],
            height: d[i],
        })
        .collect())
}

/// Trapezoidal `KL(truth || model)` at interaction degree `x`, both densities
/// floored at [`KL_DENSITY_FLOOR`].
pub fn kl_to_truth(model: &dyn ConditionalDensity, x: f64, grid: &[f64]) -> Result<f64> {
    if grid.len() < 2 {
        return Err(Error::InvalidArgument("KL grid needs at least two points".into()));
    }
    let gm = model.mixture(x);
    let mut integrand = Vec::with_capacity(grid.len());
    for &y in grid {
        let p = double_slit_pdf(x, y)?.max(KL_DENSITY_FLOOR);
        let q = gm.pdf(y).max(KL_DENSITY_FLOOR);
        integrand.push(p * (p / q).ln());
    }
    Ok(trapezoid(grid, &integrand))
}

/// Mean `-ln p(y | x)` over a dataset.
pub fn held_out_nll(model: &dyn ConditionalDensity, ds: &Dataset) -> Result<f64> {
    if ds.is_empty() {
        return Err(Error::Empty);
    }
    let total: f64 = ds
        .pairs()
        .iter()
        .map(|&(x, y)| model.mixture(x).log_pdf(y))
        .sum();
    Ok(-total / ds.len() as f64)
}

/// One draw from the model's mixture per input.
pub fn sample_predictions<R: Rng + ?Sized>(
    model: &dyn ConditionalDensity,
    xs: &[f64],
    rng: &mut R,
) -> Result<Dataset> {
    let pairs = xs
        .iter()
        .map(|&x| (x, model.mixture(x).sample(rng)))
        .collect();
    let mut params = BTreeMap::new();
    params.insert("source".into(), "model-samples".into());
    Dataset::new(
        pairs,
        DatasetMeta {
            generator: "predictions".into(),
            seed: None,
            n: xs.len(),
            params,
        },
    )
}

/// Median of a non-empty slice (mean of the middle pair for even lengths).
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}
