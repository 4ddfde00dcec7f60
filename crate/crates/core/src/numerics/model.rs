use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::dataset::Dataset;
use super::fixed::{FixedParams, FixedVec, Ring};
use crate::error::{Error, Result};

/// Fully connected classifier with ReLU hidden layers and identity output.
///
/// Parameters are flattened layer by layer: row-major weights
/// (`out x in`) followed by the bias of length `out`. A model with
/// `layer_dims = [in, L]` is multinomial logistic regression.
#[derive(Clone, Debug, PartialEq)]
pub struct MlpModel {
    pub layer_dims: Vec<usize>,
    pub params: Vec<f64>,
}

/// Offsets of one layer inside the flat parameter vector.
#[derive(Clone, Copy, Debug)]
struct LayerSpan {
    inputs: usize,
    outputs: usize,
    weights: usize,
    bias: usize,
}

fn layer_spans(dims: &[usize]) -> Vec<LayerSpan> {
    let mut offset = 0;
    dims.windows(2)
        .map(|w| {
            let (inputs, outputs) = (w[0], w[1]);
            let span = LayerSpan {
                inputs,
                outputs,
                weights: offset,
                bias: offset + inputs * outputs,
            };
            offset += inputs * outputs + outputs;
            span
        })
        .collect()
}

pub fn param_count(dims: &[usize]) -> usize {
    dims.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

impl MlpModel {
    pub fn zeros(layer_dims: &[usize]) -> Self {
        MlpModel {
            layer_dims: layer_dims.to_vec(),
            params: vec![0.0; param_count(layer_dims)],
        }
    }

    /// He-style normal initialisation for weights, zero biases.
    pub fn random<R: Rng + ?Sized>(layer_dims: &[usize], rng: &mut R) -> Self {
        let mut model = Self::zeros(layer_dims);
        for span in layer_spans(layer_dims) {
            let std = (2.0 / span.inputs as f64).sqrt() * 0.5;
            let normal = Normal::new(0.0, std).expect("finite std");
            for w in &mut model.params[span.weights..span.bias] {
                *w = normal.sample(rng);
            }
        }
        model
    }

    pub fn from_params(layer_dims: &[usize], params: Vec<f64>) -> Result<Self> {
        let expected = param_count(layer_dims);
        if params.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: params.len(),
            });
        }
        Ok(MlpModel {
            layer_dims: layer_dims.to_vec(),
            params,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn classes(&self) -> usize {
        *self.layer_dims.last().expect("at least one layer")
    }

    pub fn to_fixed(&self, p: FixedParams) -> Result<FixedVec> {
        FixedVec::from_reals(&self.params, p)
    }

    pub fn from_fixed(layer_dims: &[usize], v: &FixedVec) -> Result<Self> {
        Self::from_params(layer_dims, v.to_reals())
    }

    /// Model with `delta` added to every parameter.
    pub fn with_update(&self, delta: &[f64]) -> Result<Self> {
        if delta.len() != self.params.len() {
            return Err(Error::DimensionMismatch {
                expected: self.params.len(),
                actual: delta.len(),
            });
        }
        let params = self.params.iter().zip(delta).map(|(w, d)| w + d).collect();
        Ok(MlpModel {
            layer_dims: self.layer_dims.clone(),
            params,
        })
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward_trace(x)?.pop().expect("output layer"))
    }

    /// Activations of every layer, input first. Hidden layers are
    /// post-ReLU; the final entry holds the logits.
    pub(crate) fn forward_trace(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                actual: x.len(),
            });
        }
        let spans = layer_spans(&self.layer_dims);
        let mut acts = Vec::with_capacity(spans.len() + 1);
        acts.push(x.to_vec());
        for (l, span) in spans.iter().enumerate() {
            let input = &acts[l];
            let mut out = self.params[span.bias..span.bias + span.outputs].to_vec();
            for (o, v) in out.iter_mut().enumerate() {
                let row = &self.params[span.weights + o * span.inputs..][..span.inputs];
                *v += row.iter().zip(input).map(|(w, a)| w * a).sum::<f64>();
            }
            if l + 1 < spans.len() {
                out.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            acts.push(out);
        }
        Ok(acts)
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        Ok(argmax(&self.forward(x)?))
    }
}

/// Fixed-point forward pass: each neuron accumulates the double-scale dot
/// product in the ring and truncates once before adding the bias.
pub fn forward_fixed(
    layer_dims: &[usize],
    params: &FixedVec,
    x: &[Ring],
) -> Result<Vec<Ring>> {
    let expected = param_count(layer_dims);
    if params.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            actual: params.len(),
        });
    }
    if x.len() != layer_dims[0] {
        return Err(Error::DimensionMismatch {
            expected: layer_dims[0],
            actual: x.len(),
        });
    }
    let p = params.params;
    let spans = layer_spans(layer_dims);
    let mut act = x.to_vec();
    for (l, span) in spans.iter().enumerate() {
        let mut out = Vec::with_capacity(span.outputs);
        for o in 0..span.outputs {
            let row = &params.data[span.weights + o * span.inputs..][..span.inputs];
            let acc = row
                .iter()
                .zip(&act)
                .fold(0u128, |acc, (&w, &a)| p.add(acc, p.mul(w, a)));
            let mut v = p.add(p.truncate(acc), params.data[span.bias + o]);
            if l + 1 < spans.len() && p.to_signed(v) < 0 {
                v = 0;
            }
            out.push(v);
        }
        act = out;
    }
    Ok(act)
}

/// Index of the largest logit; ties go to the lowest index.
pub fn argmax(logits: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in logits.iter().enumerate().skip(1) {
        if v > logits[best] {
            best = i;
        }
    }
    best
}

pub fn argmax_signed(logits: &[i128]) -> usize {
    let mut best = 0;
    for (i, &v) in logits.iter().enumerate().skip(1) {
        if v > logits[best] {
            best = i;
        }
    }
    best
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Fraction of rows whose predicted label matches.
pub fn accuracy(model: &MlpModel, d: &Dataset) -> Result<f64> {
    if d.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut correct = 0usize;
    for (x, &y) in d.rows().zip(&d.labels) {
        if model.predict(x)? == y {
            correct += 1;
        }
    }
    Ok(correct as f64 / d.len() as f64)
}

/// Mean over rows of the largest softmax probability.
pub fn max_softmax_mean(model: &MlpModel, d: &Dataset) -> Result<f64> {
    if d.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut total = 0.0;
    for x in d.rows() {
        let probs = softmax(&model.forward(x)?);
        total += probs.iter().copied().fold(0.0, f64::max);
    }
    Ok(total / d.len() as f64)
}
