//! Benchmark data: the double-slit conditional density and the logistic-map
//! bifurcation series, plus CSV persistence.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::mixture::GaussianMixture;
use crate::models::ConditionalDensity;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Benchmark {
    DoubleSlit,
    Logistic,
}

impl Benchmark {
    pub fn as_str(self) -> &'static str {
        match self {
            Benchmark::DoubleSlit => "double-slit",
            Benchmark::Logistic => "logistic",
        }
    }
}

impl fmt::Display for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Benchmark {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "double-slit" | "double_slit" => Ok(Benchmark::DoubleSlit),
            "logistic" => Ok(Benchmark::Logistic),
            other => Err(Error::InvalidArgument(format!("unknown benchmark `{other}`"))),
        }
    }
}

/// Provenance of a dataset.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DatasetMeta {
    pub generator: String,
    pub seed: Option<u64>,
    pub n: usize,
    /// Generator-specific settings, written as `key=value` pairs.
    pub params: BTreeMap<String, String>,
}

/// Ordered `(x, y)` samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pairs: Vec<(f64, f64)>,
    meta: DatasetMeta,
}

impl Dataset {
    pub fn new(pairs: Vec<(f64, f64)>, mut meta: DatasetMeta) -> Result<Self> {
        if let Some(i) = pairs
            .iter()
            .position(|(x, y)| !x.is_finite() || !y.is_finite())
        {
            return Err(Error::InvalidArgument(format!("non-finite sample at row {i}")));
        }
        meta.n = pairs.len();
        Ok(Self { pairs, meta })
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    pub fn meta(&self) -> &DatasetMeta {
        &self.meta
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn xs(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.0).collect()
    }

    pub fn ys(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.1).collect()
    }

    /// Which benchmark generated this data, if known.
    pub fn benchmark(&self) -> Option<Benchmark> {
        self.meta.generator.parse().ok()
    }
}

// Interference pattern: (weight, mean), all with std 0.15.
const INTERFERENCE: [(f64, f64); 5] = [
    (0.35, 0.0),
    (0.2, -1.0),
    (0.2, 1.0),
    (0.125, -2.0),
    (0.125, 2.0),
];
const INTERFERENCE_STD: f64 = 0.15;
// Collapsed two-slit pattern, std 0.1.
const COLLAPSED: [(f64, f64); 2] = [(0.5, -1.0), (0.5, 1.0)];
const COLLAPSED_STD: f64 = 0.1;

/// The double-slit ground truth at interaction degree `x` as a 7-component
/// mixture: `(1 - x) * interference + x * collapsed`.
pub fn double_slit_mixture(x: f64) -> Result<GaussianMixture> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidArgument(format!(
            "double-slit interaction degree must be in [0, 1], got {x}"
        )));
    }
    let mut w = Vec::with_capacity(7);
    let mut m = Vec::with_capacity(7);
    let mut s = Vec::with_capacity(7);
    for (a, mu) in INTERFERENCE {
        w.push((1.0 - x) * a);
        m.push(mu);
        s.push(INTERFERENCE_STD);
    }
    for (a, mu) in COLLAPSED {
        w.push(x * a);
        m.push(mu);
        s.push(COLLAPSED_STD);
    }
    GaussianMixture::new(w, m, s)
}

/// `p(y | x)` of the double-slit benchmark.
pub fn double_slit_pdf(x: f64, y: f64) -> Result<f64> {
    Ok(double_slit_mixture(x)?.pdf(y))
}

/// The analytic double-slit density as a [`ConditionalDensity`].
#[derive(Debug, Clone, Copy, Default)]
pub struct DoubleSlitTruth;

impl ConditionalDensity for DoubleSlitTruth {
    fn mixture(&self, x: f64) -> GaussianMixture {
        double_slit_mixture(x.clamp(0.0, 1.0)).expect("clamped x is in range")
    }
}

/// Samples `n` pairs with `x ~ U[0, 1]` and `y ~ p(y | x)`.
pub fn gen_double_slit<R: Rng + ?Sized>(n: usize, rng: &mut R, seed: Option<u64>) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::InvalidArgument("dataset size must be positive".into()));
    }
    let mut pairs = Vec::with_capacity(n);
    for _ in 0..n {
        let x: f64 = rng.random();
        let gm = double_slit_mixture(x)?;
        let k = WeightedIndex::new(gm.weights())
            .expect("truth weights are valid")
            .sample(rng);
        let z: f64 = rng.sample(StandardNormal);
        pairs.push((x, gm.means()[k] + gm.stds()[k] * z));
    }
    let mut params = BTreeMap::new();
    params.insert("x_law".into(), "uniform[0,1]".into());
    Dataset::new(
        pairs,
        DatasetMeta {
            generator: Benchmark::DoubleSlit.to_string(),
            seed,
            n,
            params,
        },
    )
}

pub const LOGISTIC_Y0: f64 = 0.5;
pub const LOGISTIC_DISCARD: usize = 5;
pub const LOGISTIC_KEEP: usize = 100;
pub const LOGISTIC_X_MIN: f64 = 2.5;
pub const LOGISTIC_X_MAX: f64 = 4.0;
pub const LOGISTIC_N_X: usize = 150;

/// Iterates `y <- x y (1 - y)` from `y0`, drops the first `discard` iterates
/// and returns the next `keep`.
pub fn logistic_series(x: f64, y0: f64, discard: usize, keep: usize) -> Result<Vec<f64>> {
    if !(0.0..=4.0).contains(&x) {
        return Err(Error::InvalidArgument(format!("logistic parameter {x} outside [0, 4]")));
    }
    if !(y0 > 0.0 && y0 < 1.0) {
        return Err(Error::InvalidArgument(format!("initial value {y0} outside (0, 1)")));
    }
    let mut y = y0;
    let mut out = Vec::with_capacity(keep);
    for step in 0..discard + keep {
        y = x * y * (1.0 - y);
        if step >= discard {
            out.push(y);
        }
    }
    Ok(out)
}

/// `n_x` evenly spaced parameters on `[2.5, 4)` with `per_x` iterates each.
pub fn gen_logistic(n_x: usize, per_x: usize) -> Result<Dataset> {
    if n_x == 0 || per_x == 0 {
        return Err(Error::InvalidArgument("grid sizes must be positive".into()));
    }
    let step = (LOGISTIC_X_MAX - LOGISTIC_X_MIN) / n_x as f64;
    let mut pairs = Vec::with_capacity(n_x * per_x);
    for k in 0..n_x {
        let x = LOGISTIC_X_MIN + k as f64 * step;
        for y in logistic_series(x, LOGISTIC_Y0, LOGISTIC_DISCARD, per_x)? {
            pairs.push((x, y));
        }
    }
    let mut params = BTreeMap::new();
    params.insert("n_x".into(), n_x.to_string());
    params.insert("per_x".into(), per_x.to_string());
    params.insert("y0".into(), LOGISTIC_Y0.to_string());
    params.insert("discard".into(), LOGISTIC_DISCARD.to_string());
    params.insert("x_range".into(), "[2.5,4)".into());
    Dataset::new(
        pairs,
        DatasetMeta {
            generator: Benchmark::Logistic.to_string(),
            seed: None,
            n: n_x * per_x,
            params,
        },
    )
}

/// Sibling metadata path: `data.csv` -> `data.meta`.
pub fn meta_path(csv: &Path) -> PathBuf {
    csv.with_extension("meta")
}

fn f17(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn dataset_to_csv(ds: &Dataset) -> String {
    let mut out = String::with_capacity(48 * ds.len() + 4);
    out.push_str("x,y\n");
    for (x, y) in ds.pairs() {
        out.push_str(&f17(*x));
        out.push(',');
        out.push_str(&f17(*y));
        out.push('\n');
    }
    out
}

pub fn meta_to_text(meta: &DatasetMeta) -> String {
    let seed = meta.seed.map_or_else(|| "none".to_string(), |s| s.to_string());
    let params: Vec<String> = meta.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!(
        "generator={}\nseed={}\nn={}\nparams={}\n",
        meta.generator,
        seed,
        meta.n,
        params.join(";")
    )
}

/// Writes `x,y` CSV plus the sibling metadata file.
pub fn save_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, dataset_to_csv(ds)).map_err(|e| Error::io(path, e))?;
    let meta = meta_path(path);
    fs::write(&meta, meta_to_text(ds.meta())).map_err(|e| Error::io(meta, e))
}

fn parse_meta(path: &Path, text: &str) -> Result<DatasetMeta> {
    let mut meta = DatasetMeta::default();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(path, i + 1, "expected key=value"))?;
        match k {
            "generator" => meta.generator = v.to_string(),
            "seed" if v == "none" => meta.seed = None,
            "seed" => {
                meta.seed = Some(v.parse().map_err(|_| Error::parse(path, i + 1, "bad seed"))?)
            }
            "n" => meta.n = v.parse().map_err(|_| Error::parse(path, i + 1, "bad n"))?,
            "params" => {
                for kv in v.split(';').filter(|s| !s.is_empty()) {
                    let (pk, pv) = kv
                        .split_once('=')
                        .ok_or_else(|| Error::parse(path, i + 1, "bad params entry"))?;
                    meta.params.insert(pk.to_string(), pv.to_string());
                }
            }
            _ => {}
        }
    }
    Ok(meta)
}

/// Loads a CSV written by [`save_csv`]. The metadata file is optional; without
/// it the generator is recorded as `unknown`.
pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == "x,y" => {}
        Some((_, h)) => return Err(Error::parse(path, 1, format!("expected header `x,y`, found `{h}`"))),
        None => return Err(Error::parse(path, 1, "empty file")),
    }
    let mut pairs = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let (a, b) = line
            .split_once(',')
            .ok_or_else(|| Error::parse(path, i + 1, "expected two comma-separated fields"))?;
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::parse(path, i + 1, format!("non-numeric field `{s}`")))
        };
        pairs.push((parse(a)?, parse(b)?));
    }
    if pairs.is_empty() {
        return Err(Error::parse(path, 2, "no data rows"));
    }
    let meta_file = meta_path(path);
    let meta = match fs::read_to_string(&meta_file) {
        Ok(t) => parse_meta(&meta_file, &t)?,
        Err(_) => DatasetMeta {
            generator: "unknown".into(),
            ..Default::default()
        },
    };
    Dataset::new(pairs, meta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn double_slit_point_values() {
        let p00 = double_slit_pdf(0.0, 0.0).unwrap();
        let want = 0.35 / ((2.0 * std::f64::consts::PI).sqrt() * 0.15);
        assert!((p00 - want).abs() < 1e-9);
        assert!((p00 - 0.9309).abs() < 1e-4);
        let p11 = double_slit_pdf(1.0, 1.0).unwrap();
        assert!((p11 - 1.9947).abs() < 1e-4);
        assert!(double_slit_pdf(1.2, 0.0).is_err());
        assert!(double_slit_pdf(-0.1, 0.0).is_err());
    }

    #[test]
    fn logistic_steps() {
        let s = logistic_series(2.5, 0.5, 0, 1).unwrap();
        assert_eq!(s, vec![0.625]);
        let long = logistic_series(2.5, 0.5, 1000, 1).unwrap();
        assert!((long[0] - 0.6).abs() < 1e-12);
        let degenerate = logistic_series(4.0, 0.5, 0, 4).unwrap();
        assert_eq!(degenerate, vec![1.0, 0.0, 0.0, 0.0]);
        assert!(logistic_series(4.5, 0.5, 0, 1).is_err());
        assert!(logistic_series(3.0, 1.0, 0, 1).is_err());
    }

    #[test]
    fn logistic_dataset_shape() {
        let ds = gen_logistic(150, 100).unwrap();
        assert_eq!(ds.len(), 15_000);
        assert!(ds.pairs().iter().all(|&(x, y)| (0.0..=1.0).contains(&y) && x < 4.0));
        assert_eq!(ds, gen_logistic(150, 100).unwrap());
        assert_eq!(ds.pairs()[0].0, 2.5);
    }

    #[test]
    fn double_slit_is_seeded() {
        let a = gen_double_slit(500, &mut ChaCha8Rng::seed_from_u64(1), Some(1)).unwrap();
        let b = gen_double_slit(500, &mut ChaCha8Rng::seed_from_u64(1), Some(1)).unwrap();
        assert_eq!(dataset_to_csv(&a), dataset_to_csv(&b));
        assert_eq!(a.meta().n, 500);
        assert!(gen_double_slit(0, &mut ChaCha8Rng::seed_from_u64(1), None).is_err());
    }

    #[test]
    fn csv_roundtrip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let ds = gen_double_slit(64, &mut ChaCha8Rng::seed_from_u64(2), Some(2)).unwrap();
        save_csv(&ds, &path).unwrap();
        assert!(dir.path().join("d.meta").exists());
        let back = load_csv(&path).unwrap();
        assert_eq!(back, ds);

        let empty = dir.path().join("e.csv");
        fs::write(&empty, "").unwrap();
        assert!(load_csv(&empty).is_err());
        fs::write(&empty, "x,y\n").unwrap();
        assert!(load_csv(&empty).is_err());
        fs::write(&empty, "x,y\n1.0,abc\n").unwrap();
        assert!(matches!(load_csv(&empty), Err(Error::Parse { line: 2, .. })));
        fs::write(&empty, "a,b\n1,2\n").unwrap();
        assert!(load_csv(&empty).is_err());
    }
}
