use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use super::fixed::{FixedParams, FixedVec};
use super::model::{param_count, softmax, MlpModel};
use crate::error::{Error, Result};

/// Client optimiser settings. These are not taken from any reference run;
/// they are exposed so experiments can set them explicitly.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainOptions {
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: usize,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            epochs: 1,
            lr: 0.1,
            batch_size: 16,
        }
    }
}

/// Mean cross-entropy gradient of `model` over the given rows.
fn batch_gradient(model: &MlpModel, d: &Dataset, rows: &[usize]) -> Result<Vec<f64>> {
    let dims = &model.layer_dims;
    let mut grad = vec![0.0; param_count(dims)];
    let n_layers = dims.len() - 1;
    // layer offsets into the flat parameter vector
    let mut offsets = Vec::with_capacity(n_layers);
    let mut off = 0;
    for l in 0..n_layers {
        offsets.push(off);
        off += dims[l] * dims[l + 1] + dims[l + 1];
    }

    for &r in rows {
        let acts = model.forward_trace(d.row(r))?;
        let mut delta = softmax(&acts[n_layers]);
        delta[d.labels[r]] -= 1.0;
        for l in (0..n_layers).rev() {
            let (inputs, outputs) = (dims[l], dims[l + 1]);
            let (w_off, b_off) = (offsets[l], offsets[l] + inputs * outputs);
            let a_in = &acts[l];
            for o in 0..outputs {
                let g = delta[o];
                if g == 0.0 {
                    continue;
                }
                for (k, a) in a_in.iter().enumerate() {
                    grad[w_off + o * inputs + k] += g * a;
                }
                grad[b_off + o] += g;
            }
            if l > 0 {
                let mut prev = vec![0.0; inputs];
                for (k, p) in prev.iter_mut().enumerate() {
                    // ReLU derivative: hidden activations are stored post-ReLU
                    if a_in[k] <= 0.0 {
                        continue;
                    }
                    *p = (0..outputs)
                        .map(|o| model.params[w_off + o * inputs + k] * delta[o])
                        .sum();
                }
                delta = prev;
            }
        }
    }
    let scale = 1.0 / rows.len() as f64;
    grad.iter_mut().for_each(|g| *g *= scale);
    Ok(grad)
}

/// Minibatch SGD on cross-entropy. Returns the trained model.
pub fn sgd_train<R: Rng + ?Sized>(
    model: &MlpModel,
    d: &Dataset,
    opts: &TrainOptions,
    rng: &mut R,
) -> Result<MlpModel> {
    if opts.lr <= 0.0 || !opts.lr.is_finite() {
        return Err(Error::config("training.lr", "must be positive"));
    }
    if d.dim != model.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: model.input_dim(),
            actual: d.dim,
        });
    }
    let mut current = model.clone();
    if d.is_empty() || opts.epochs == 0 {
        return Ok(current);
    }
    let batch = opts.batch_size.max(1);
    let mut order: Vec<usize> = (0..d.len()).collect();
    for _ in 0..opts.epochs {
        order.shuffle(rng);
        for chunk in order.chunks(batch) {
            let grad = batch_gradient(&current, d, chunk)?;
            for (w, g) in current.params.iter_mut().zip(&grad) {
                *w -= opts.lr * g;
            }
        }
    }
    Ok(current)
}

/// Real-valued update `w_new - w_old` after local training.
pub fn local_update<R: Rng + ?Sized>(
    model: &MlpModel,
    d: &Dataset,
    opts: &TrainOptions,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let trained = sgd_train(model, d, opts, rng)?;
    Ok(trained
        .params
        .iter()
        .zip(&model.params)
        .map(|(n, o)| n - o)
        .collect())
}

/// Local update encoded for sharing.
pub fn local_train<R: Rng + ?Sized>(
    model: &MlpModel,
    d: &Dataset,
    opts: &TrainOptions,
    params: FixedParams,
    rng: &mut R,
) -> Result<FixedVec> {
    FixedVec::from_reals(&local_update(model, d, opts, rng)?, params)
}
