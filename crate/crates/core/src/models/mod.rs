//! The two trainable model families.
//!
//! Both map a scalar input `x` to a [`GaussianMixture`] and expose their
//! trainable parameters as one flat slice so the optimizer can treat them
//! uniformly.

mod classical;
mod io;
mod quantum;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::Normal;

pub use classical::{ClassicalMdn, CLASSICAL_HIDDEN, CLASSICAL_MODES, CLASSICAL_PARAM_COUNT};
pub use io::{read_model, read_model_file, write_model, write_model_file, ModelFile};
pub use quantum::{QMdn, QMDN_PARAM_COUNT};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::mixture::GaussianMixture;

/// Standard deviation of the Gaussian used to initialize every trainable
/// parameter.
pub const INIT_STD: f64 = 0.05;

/// Something that yields a conditional density `p(y | x)`.
pub trait ConditionalDensity {
    fn mixture(&self, x: f64) -> GaussianMixture;
}

/// A trainable mixture-density model.
pub trait MixtureModel: ConditionalDensity {
    fn kind(&self) -> ModelKind;

    fn params(&self) -> &[f64];

    fn params_mut(&mut self) -> &mut [f64];

    fn param_count(&self) -> usize {
        self.params().len()
    }

    fn normalization(&self) -> &Normalization;

    fn set_normalization(&mut self, norm: Normalization);

    /// Adds `weight * d(-ln p(y|x))/d params` into `grad` and returns the
    /// unweighted per-sample loss `-ln p(y|x)`.
    fn accumulate_gradient(&self, x: f64, y: f64, weight: f64, grad: &mut [f64]) -> f64;

    /// Per-sample gradient and loss.
    fn backward(&self, x: f64, y: f64) -> (Vec<f64>, f64) {
        let mut grad = vec![0.0; self.param_count()];
        let loss = self.accumulate_gradient(x, y, 1.0, &mut grad);
        (grad, loss)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    /// Classical mixture-density network (MLP).
    Mdn,
    /// Quantum mixture-density network (three circuit heads).
    Qmdn,
}

impl ModelKind {
    pub const ALL: [ModelKind; 2] = [ModelKind::Mdn, ModelKind::Qmdn];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Mdn => "mdn",
            ModelKind::Qmdn => "qmdn",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mdn" | "classical" => Ok(ModelKind::Mdn),
            "qmdn" | "quantum" => Ok(ModelKind::Qmdn),
            other => Err(Error::InvalidArgument(format!("unknown model kind `{other}`"))),
        }
    }
}

impl serde::Serialize for ModelKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> serde::Deserialize<'de> for ModelKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Data-dependent constants stored with a model: the training-set range of
/// `x` (inputs are min-max scaled to `[0, 1]`) and the width that a raw sigma
/// of 1 corresponds to in units of `y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalization {
    pub x_min: f64,
    pub x_max: f64,
    pub sigma_scale: f64,
}

impl Default for Normalization {
    fn default() -> Self {
        Self {
            x_min: 0.0,
            x_max: 1.0,
            sigma_scale: 1.0,
        }
    }
}

impl Normalization {
    /// `x` bounds from the dataset; sigma scale is half the standard
    /// deviation of `y`.
    pub fn from_dataset(ds: &Dataset) -> Result<Self> {
        if ds.is_empty() {
            return Err(Error::Empty);
        }
        let (mut x_min, mut x_max) = (f64::INFINITY, f64::NEG_INFINITY);
        for &(x, _) in ds.pairs() {
            x_min = x_min.min(x);
            x_max = x_max.max(x);
        }
        let n = ds.len() as f64;
        let mean = ds.pairs().iter().map(|p| p.1).sum::<f64>() / n;
        let var = ds.pairs().iter().map(|p| (p.1 - mean).powi(2)).sum::<f64>() / n;
        let sigma_scale = if var > 0.0 { 0.5 * var.sqrt() } else { 1.0 };
        Ok(Self {
            x_min,
            x_max,
            sigma_scale,
        })
    }

    /// Maps `x` into `[0, 1]` over the training range (values outside the
    /// range extrapolate linearly).
    pub fn scale_x(&self, x: f64) -> f64 {
        let width = self.x_max - self.x_min;
        if width > 0.0 {
            (x - self.x_min) / width
        } else {
            0.0
        }
    }
}

/// Draws `n` i.i.d. values from `N(0, INIT_STD^2)`.
pub(crate) fn init_params<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let normal = Normal::new(0.0, INIT_STD).expect("valid std");
    (0..n).map(|_| rng.sample(normal)).collect()
}

/// Either model family, for code that handles both uniformly.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Classical(ClassicalMdn),
    Quantum(QMdn),
}

impl Model {
    pub fn init<R: Rng + ?Sized>(kind: ModelKind, rng: &mut R) -> Self {
        match kind {
            ModelKind::Mdn => Model::Classical(ClassicalMdn::init(rng)),
            ModelKind::Qmdn => Model::Quantum(QMdn::init(rng)),
        }
    }

    fn inner(&self) -> &dyn MixtureModel {
        match self {
            Model::Classical(m) => m,
            Model::Quantum(m) => m,
        }
    }

    fn inner_mut(&mut self) -> &mut dyn MixtureModel {
        match self {
            Model::Classical(m) => m,
            Model::Quantum(m) => m,
        }
    }
}

impl ConditionalDensity for Model {
    fn mixture(&self, x: f64) -> GaussianMixture {
        self.inner().mixture(x)
    }
}

impl MixtureModel for Model {
    fn kind(&self) -> ModelKind {
        self.inner().kind()
    }

    fn params(&self) -> &[f64] {
        self.inner().params()
    }

    fn params_mut(&mut self) -> &mut [f64] {
        self.inner_mut().params_mut()
    }

    fn normalization(&self) -> &Normalization {
        self.inner().normalization()
    }

    fn set_normalization(&mut self, norm: Normalization) {
        self.inner_mut().set_normalization(norm)
    }

    fn accumulate_gradient(&self, x: f64, y: f64, weight: f64, grad: &mut [f64]) -> f64 {
        self.inner().accumulate_gradient(x, y, weight, grad)
    }
}

/// Returns the trainable-parameter count of a model.
pub fn param_count(model: &dyn MixtureModel) -> usize {
    model.param_count()
}
