//! Mini-batch NLL training with Adam and ensemble orchestration.
//!
//! Randomness is derived from one `u64` seed: stream 0 of a ChaCha8 generator
//! seeded with it initializes the model, and stream `epoch + 1` shuffles the
//! data for that epoch. Ensemble member `k` uses seed `seed + k`.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::models::{MixtureModel, Model, ModelKind, Normalization};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub ensemble_size: usize,
    pub seed: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Disables all parallelism (ensemble fan-out and per-batch gradients).
    pub strict_sequential: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 5e-3,
            batch_size: 64,
            epochs: 100,
            ensemble_size: 10,
            seed: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            strict_sequential: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidArgument(msg.to_string()));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if self.batch_size == 0 || self.epochs == 0 || self.ensemble_size == 0 {
            return bad("batch_size, epochs and ensemble_size must be positive");
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return bad("Adam betas must lie in [0, 1)");
        }
        if !(self.epsilon > 0.0) {
            return bad("Adam epsilon must be positive");
        }
        Ok(())
    }
}

/// Adam moment estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    pub fn new(n_params: usize, beta1: f64, beta2: f64, epsilon: f64) -> Self {
        Self {
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
            t: 0,
            beta1,
            beta2,
            epsilon,
        }
    }

    pub fn from_config(n_params: usize, cfg: &TrainConfig) -> Self {
        Self::new(n_params, cfg.beta1, cfg.beta2, cfg.epsilon)
    }
}

/// One bias-corrected Adam update, in place.
pub fn adam_step(params: &mut [f64], grads: &[f64], state: &mut AdamState, lr: f64) -> Result<()> {
    for (what, len) in [("gradient", grads.len()), ("Adam m", state.m.len()), ("Adam v", state.v.len())] {
        if len != params.len() {
            return Err(Error::LengthMismatch {
                what,
                expected: params.len(),
                actual: len,
            });
        }
    }
    state.t += 1;
    let (b1, b2) = (state.beta1, state.beta2);
    let c1 = 1.0 - b1.powi(state.t as i32);
    let c2 = 1.0 - b2.powi(state.t as i32);
    for i in 0..params.len() {
        let g = grads[i];
        state.m[i] = b1 * state.m[i] + (1.0 - b1) * g;
        state.v[i] = b2 * state.v[i] + (1.0 - b2) * g * g;
        let m_hat = state.m[i] / c1;
        let v_hat = state.v[i] / c2;
        params[i] -= lr * m_hat / (v_hat.sqrt() + state.epsilon);
    }
    Ok(())
}

/// Outcome of training one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub model_kind: ModelKind,
    pub seed: u64,
    /// Mean training NLL of each epoch, accumulated over the epoch's batches
    /// before each update.
    pub epoch_losses: Vec<f64>,
    pub final_params: Vec<f64>,
    /// Excluded from JSON run files so reruns are byte-identical.
    #[serde(skip)]
    pub wall_clock_seconds: f64,
}

impl TrainReport {
    pub fn final_loss(&self) -> f64 {
        *self.epoch_losses.last().expect("at least one epoch")
    }
}

fn epoch_rng(seed: u64, epoch: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(epoch as u64 + 1);
    rng
}

/// Generator used to initialize a model trained with `seed`.
pub fn init_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn batch_gradient<M: MixtureModel + Sync>(
    model: &M,
    data: &[(f64, f64)],
    batch: &[usize],
    parallel: bool,
    grad: &mut [f64],
) -> f64 {
    let weight = 1.0 / batch.len() as f64;
    grad.iter_mut().for_each(|g| *g = 0.0);
    if parallel {
        let per_sample: Vec<(Vec<f64>, f64)> = batch
            .par_iter()
            .map(|&i| {
                let (x, y) = data[i];
                let mut g = vec![0.0; grad.len()];
                let loss = model.accumulate_gradient(x, y, weight, &mut g);
                (g, loss)
            })
            .collect();
        // fixed-order reduction keeps results identical to the sequential path
        let mut loss_sum = 0.0;
        for (g, loss) in per_sample {
            grad.iter_mut().zip(&g).for_each(|(a, b)| *a += b);
            loss_sum += loss;
        }
        loss_sum
    } else {
        let mut loss_sum = 0.0;
        for &i in batch {
            let (x, y) = data[i];
            loss_sum += model.accumulate_gradient(x, y, weight, grad);
        }
        loss_sum
    }
}

/// Trains `model` in place on `ds`.
///
/// The model's normalization is expected to be bound already (see
/// [`Normalization::from_dataset`]); the shuffle stream is derived from
/// `seed`. Aborts on the first non-finite batch loss.
pub fn train_model<M: MixtureModel + Sync>(
    model: &mut M,
    ds: &Dataset,
    cfg: &TrainConfig,
    seed: u64,
) -> Result<TrainReport> {
    cfg.validate()?;
    if ds.is_empty() {
        return Err(Error::Empty);
    }
    let start = Instant::now();
    let data = ds.pairs();
    let n_params = model.param_count();
    let mut adam = AdamState::from_config(n_params, cfg);
    let mut grad = vec![0.0; n_params];
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    // batch-level parallelism only pays off for the heavier circuit model
    let parallel = !cfg.strict_sequential && model.kind() == ModelKind::Qmdn;

    for epoch in 0..cfg.epochs {
        order.sort_unstable();
        order.shuffle(&mut epoch_rng(seed, epoch));
        let mut loss_sum = 0.0;
        for (b, batch) in order.chunks(cfg.batch_size).enumerate() {
            let batch_loss = batch_gradient(model, data, batch, parallel, &mut grad);
            if !batch_loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                let param_norm = model.params().iter().map(|p| p * p).sum::<f64>().sqrt();
                return Err(Error::NonFiniteLoss {
                    epoch,
                    batch: b,
                    param_norm,
                });
            }
            loss_sum += batch_loss;
            adam_step(model.params_mut(), &grad, &mut adam, cfg.learning_rate)?;
        }
        epoch_losses.push(loss_sum / data.len() as f64);
    }

    Ok(TrainReport {
        model_kind: model.kind(),
        seed,
        epoch_losses,
        final_params: model.params().to_vec(),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Initializes a model of `kind` from `seed`, binds it to `ds`, and trains it.
pub fn train_new(kind: ModelKind, ds: &Dataset, cfg: &TrainConfig, seed: u64) -> Result<(Model, TrainReport)> {
    let mut model = Model::init(kind, &mut init_rng(seed));
    model.set_normalization(Normalization::from_dataset(ds)?);
    let report = train_model(&mut model, ds, cfg, seed)?;
    Ok((model, report))
}

/// Trains `cfg.ensemble_size` independent models with seeds `cfg.seed + k`.
/// Members run concurrently unless `cfg.strict_sequential` is set; results
/// come back in member order either way.
pub fn train_ensemble(kind: ModelKind, ds: &Dataset, cfg: &TrainConfig) -> Result<Vec<(Model, TrainReport)>> {
    cfg.validate()?;
    let seeds: Vec<u64> = (0..cfg.ensemble_size as u64)
        .map(|k| cfg.seed.wrapping_add(k))
        .collect();
    if cfg.strict_sequential {
        seeds.iter().map(|&s| train_new(kind, ds, cfg, s)).collect()
    } else {
        seeds.par_iter().map(|&s| train_new(kind, ds, cfg, s)).collect()
    }
}

/// First epoch (1-based) after which the quantum loss stays below the
/// classical one, if any.
pub fn crossing_epoch(classical: &[f64], quantum: &[f64]) -> Option<usize> {
    let n = classical.len().min(quantum.len());
    let mut crossing = None;
    for e in 0..n {
        if quantum[e] < classical[e] {
            crossing.get_or_insert(e + 1);
        } else {
            crossing = None;
        }
    }
    crossing
}

/// Per-epoch mean across ensemble members.
pub fn mean_history(reports: &[&TrainReport]) -> Vec<f64> {
    let n = reports.iter().map(|r| r.epoch_losses.len()).min().unwrap_or(0);
    (0..n)
        .map(|e| reports.iter().map(|r| r.epoch_losses[e]).sum::<f64>() / reports.len() as f64)
        .collect()
}

/// `epoch,nll` CSV (epochs are 1-based).
pub fn loss_history_csv(report: &TrainReport) -> String {
    let mut out = String::from("epoch,nll\n");
    for (e, l) in report.epoch_losses.iter().enumerate() {
        out.push_str(&format!("{},{:.16e}\n", e + 1, l));
    }
    out
}
