// SPDX-License-Identifier: Apache-2.0

//! Minibatch training loop.
//!
//! A batch is cut into fixed-size chunks; chunk gradients are computed
//! (possibly on several threads) and summed in chunk order, so the result
//! does not depend on the number of workers.

use log::info;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::adam::{adam_step, AdamState};
use super::loss::cosine_similarity;
use super::network::{Network, Params};
use crate::dataset::Sample;
use crate::error::{Error, Result};
use crate::record::add_noise_in_place;
use crate::seeds::{derive_named, derive_seed};

/// Samples per gradient chunk. Fixed so the reduction order never changes.
pub const CHUNK: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    /// Multiplicative learning-rate factor applied after every epoch.
    pub lr_decay: f64,
    pub seed: u64,
    /// Standard deviation of fresh Gaussian noise added to training inputs each epoch.
    pub noise_sigma: f64,
    /// Global gradient-norm clip.
    pub grad_clip: Option<f64>,
    /// Stop after this many epochs without validation-loss improvement.
    pub patience: Option<usize>,
    pub jobs: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 256,
            epochs: 200,
            learning_rate: 1e-3,
            lr_decay: 1.0,
            seed: 0,
            noise_sigma: 0.0,
            grad_clip: None,
            patience: None,
            jobs: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.epochs == 0 || self.jobs == 0 {
            return Err(Error::Config("batch_size, epochs and jobs must be positive".into()));
        }
        if !(self.learning_rate > 0.0) || !(self.lr_decay > 0.0) || !(self.noise_sigma >= 0.0) {
            return Err(Error::Config("learning_rate and lr_decay must be > 0, noise_sigma >= 0".into()));
        }
        if matches!(self.grad_clip, Some(c) if !(c > 0.0)) || self.patience == Some(0) {
            return Err(Error::Config("grad_clip and patience must be positive when set".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub val_similarity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub metrics: Vec<EpochMetrics>,
    /// Epoch whose parameters were kept (lowest validation loss).
    pub best_epoch: usize,
    /// Last epoch actually run.
    pub last_epoch: usize,
}

pub(crate) fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(e.to_string()))
}

/// Mean loss and mean gradient over `inputs`/`targets`, reduced in chunk order.
pub fn batch_gradient(
    net: &Network,
    inputs: &[&[f64]],
    targets: &[&[f64]],
    pool: Option<&rayon::ThreadPool>,
) -> Result<(f64, Params)> {
    if inputs.is_empty() || inputs.len() != targets.len() {
        return Err(Error::Shape(format!("{} inputs, {} targets", inputs.len(), targets.len())));
    }
    let work = |k: usize| -> Result<(Params, f64)> {
        let lo = k * CHUNK;
        let hi = (lo + CHUNK).min(inputs.len());
        let cache = net.forward(&inputs[lo..hi])?;
        net.backward(&cache, &targets[lo..hi])
    };
    let n_chunks = inputs.len().div_ceil(CHUNK);
    let parts: Vec<(Params, f64)> = match pool {
        Some(p) if p.current_num_threads() > 1 => {
            p.install(|| (0..n_chunks).into_par_iter().map(work).collect::<Result<Vec<_>>>())?
        }
        _ => (0..n_chunks).map(work).collect::<Result<Vec<_>>>()?,
    };
    let mut parts = parts.into_iter();
    let (mut grad, mut loss) = parts.next().expect("at least one chunk");
    for (g, l) in parts {
        grad.accumulate(&g);
        loss += l;
    }
    let n = inputs.len() as f64;
    grad.scale(1.0 / n);
    Ok((loss / n, grad))
}

/// Predictions for many samples, computed chunk by chunk.
pub fn predict_all(net: &Network, inputs: &[&[f64]]) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::with_capacity(inputs.len());
    for chunk in inputs.chunks(256) {
        let pred = net.predict(chunk)?;
        out.extend(pred.rows().into_iter().map(|r| r.to_vec()));
    }
    Ok(out)
}

/// Mean MSE and mean cosine similarity (undefined similarities skipped).
pub fn score(net: &Network, inputs: &[&[f64]], targets: &[&[f64]]) -> Result<(f64, f64)> {
    let preds = predict_all(net, inputs)?;
    let mut mse = 0.0;
    let mut sim = 0.0;
    let mut counted = 0usize;
    for (p, t) in preds.iter().zip(targets) {
        mse += super::loss::mse_loss(p, t)?;
        if let Ok(c) = cosine_similarity(p, t) {
            sim += c;
            counted += 1;
        }
    }
    let n = preds.len().max(1) as f64;
    let sim = if counted > 0 { sim / counted as f64 } else { f64::NAN };
    Ok((mse / n, sim))
}

fn noisy_copy(values: &[f64], sigma: f64, seed: u64) -> Vec<f64> {
    let mut v = values.to_vec();
    add_noise_in_place(&mut v, sigma, seed);
    v
}

/// Trains `net` in place, starting after `start_epoch` completed epochs.
///
/// The parameters with the lowest validation loss are restored at the end.
pub fn train(
    net: &mut Network,
    adam: &mut AdamState,
    train_set: &[Sample],
    val_set: &[Sample],
    cfg: &TrainConfig,
    start_epoch: usize,
    mut on_epoch: impl FnMut(&EpochMetrics),
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if train_set.is_empty() || val_set.is_empty() {
        return Err(Error::Validation("training and validation sets must be non-empty".into()));
    }
    let pool = thread_pool(cfg.jobs)?;
    let sigma = cfg.noise_sigma;
    let augment_seed = derive_named(cfg.seed, "augment");
    let val_seed = derive_named(cfg.seed, "validation-noise");
    let val_inputs: Vec<Vec<f64>> = val_set
        .iter()
        .enumerate()
        .map(|(i, s)| noisy_copy(&s.input, sigma, derive_seed(val_seed, i as u64)))
        .collect();
    let val_x: Vec<&[f64]> = val_inputs.iter().map(Vec::as_slice).collect();
    let val_y: Vec<&[f64]> = val_set.iter().map(|s| s.target.as_slice()).collect();

    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut metrics = Vec::new();
    let mut best = (f64::INFINITY, net.params.clone(), start_epoch);
    let mut since_best = 0usize;
    let mut last_epoch = start_epoch;

    for epoch in start_epoch + 1..=start_epoch + cfg.epochs {
        adam.config.learning_rate = cfg.learning_rate * cfg.lr_decay.powi((epoch - 1) as i32);
        order.sort_unstable();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, epoch as u64)));
        let epoch_seed = derive_seed(augment_seed, epoch as u64);

        let mut loss_sum = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let noisy: Vec<Vec<f64>> = if sigma > 0.0 {
                batch
                    .iter()
                    .map(|&i| noisy_copy(&train_set[i].input, sigma, derive_seed(epoch_seed, i as u64)))
                    .collect()
            } else {
                Vec::new()
            };
            let x: Vec<&[f64]> = if sigma > 0.0 {
                noisy.iter().map(Vec::as_slice).collect()
            } else {
                batch.iter().map(|&i| train_set[i].input.as_slice()).collect()
            };
            let y: Vec<&[f64]> = batch.iter().map(|&i| train_set[i].target.as_slice()).collect();
            let (loss, mut grad) = batch_gradient(net, &x, &y, Some(&pool))?;
            if let Some(clip) = cfg.grad_clip {
                let norm = grad.l2_norm();
                if norm > clip {
                    grad.scale(clip / norm);
                }
            }
            adam_step(&mut net.params, &grad, adam)?;
            loss_sum += loss * batch.len() as f64;
        }

        let (val_loss, val_similarity) = score(net, &val_x, &val_y)?;
        let m = EpochMetrics {
            epoch,
            train_loss: loss_sum / train_set.len() as f64,
            val_loss,
            val_similarity,
        };
        info!(
            "epoch {epoch}: train {:.6e} val {:.6e} F {:.5}",
            m.train_loss, m.val_loss, m.val_similarity
        );
        on_epoch(&m);
        metrics.push(m);
        last_epoch = epoch;
        if !m.train_loss.is_finite() {
            return Err(Error::Validation(format!("training diverged at epoch {epoch}")));
        }
        if val_loss < best.0 {
            best = (val_loss, net.params.clone(), epoch);
            since_best = 0;
        } else {
            since_best += 1;
            if cfg.patience.is_some_and(|p| since_best >= p) {
                break;
            }
        }
    }
    net.params = best.1;
    Ok(TrainOutcome {
        metrics,
        best_epoch: best.2,
        last_epoch,
    })
}
