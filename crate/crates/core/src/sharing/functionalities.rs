//! Sealed functionalities: inputs are reconstructed inside the component,
//! the result is computed in the clear and handed back as a fresh sharing.
//! Nothing computed here is recorded as a public reveal.

use super::mpc::{InferenceArithmetic, Mpc, SharedDataset};
use super::shares::ShareVec;
use crate::error::{Error, Result};
use crate::numerics::{
    argmax, decode_fixed, encode_fixed, forward_fixed, param_count, softmax, Dataset, FixedVec,
    MlpModel,
};

impl Mpc {
    fn bit(&self, b: bool) -> u128 {
        if b {
            encode_fixed(1.0, &self.params()).expect("1.0 encodes")
        } else {
            0
        }
    }

    /// Elementwise `x < y`; outputs shared bits encoded as fixed-point 0.0 / 1.0.
    pub fn comp_less(&mut self, x: &ShareVec, y: &ShareVec) -> Result<ShareVec> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                actual: y.len(),
            });
        }
        let (a, b) = (x.open()?, y.open()?);
        let p = self.params();
        let bits = a
            .data
            .iter()
            .zip(&b.data)
            .map(|(&u, &v)| self.bit(p.to_signed(u) < p.to_signed(v)))
            .collect();
        self.charge_ideal("comp", 2 * x.len(), x.len());
        Ok(self.reshare(&FixedVec { data: bits, params: p }))
    }

    /// Elementwise square root.
    pub fn sqrt_shared(&mut self, x: &ShareVec) -> Result<ShareVec> {
        let p = self.params();
        let v = x.open()?;
        let roots = v
            .to_reals()
            .into_iter()
            .map(|r| {
                if r < 0.0 {
                    Err(Error::NegativeSqrt(r))
                } else {
                    Ok(r.sqrt())
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let out = FixedVec::from_reals(&roots, p)?;
        self.charge_ideal("sqrt", x.len(), x.len());
        Ok(self.reshare(&out))
    }

    /// Stable ascending sort of scalar keys, carrying a shared payload with
    /// each key. `payloads` may be empty; otherwise it pairs with `keys`.
    pub fn sort_shared(
        &mut self,
        keys: &[ShareVec],
        payloads: &[ShareVec],
    ) -> Result<(Vec<ShareVec>, Vec<ShareVec>)> {
        if !payloads.is_empty() && payloads.len() != keys.len() {
            return Err(Error::WrongLength {
                expected: keys.len(),
                actual: payloads.len(),
            });
        }
        let p = self.params();
        let mut opened = Vec::with_capacity(keys.len());
        for k in keys {
            if k.len() != 1 {
                return Err(Error::DimensionMismatch {
                    expected: 1,
                    actual: k.len(),
                });
            }
            opened.push(p.to_signed(k.open()?.data[0]));
        }
        let payload_values = payloads.iter().map(|s| s.open()).collect::<Result<Vec<_>>>()?;
        let mut order: Vec<usize> = (0..keys.len()).collect();
        order.sort_by_key(|&i| opened[i]);

        let payload_len: usize = payloads.iter().map(|s| s.len()).sum();
        self.charge_ideal("sort", 2 * (keys.len() + payload_len), keys.len() + payload_len);

        let mut out_keys = Vec::with_capacity(keys.len());
        let mut out_payloads = Vec::with_capacity(payloads.len());
        for &i in &order {
            let key = FixedVec {
                data: vec![p.from_signed(opened[i])],
                params: p,
            };
            out_keys.push(self.reshare(&key));
            if let Some(v) = payload_values.get(i) {
                out_payloads.push(self.reshare(v));
            }
        }
        Ok((out_keys, out_payloads))
    }

    /// `m` shared bits: the first `k` are ones, the rest zeros.
    pub fn zero_one(&mut self, k: usize, m: usize) -> Result<Vec<ShareVec>> {
        if k > m {
            return Err(Error::WrongLength { expected: m, actual: k });
        }
        self.charge_ideal("zero_one", 0, m);
        let p = self.params();
        Ok((0..m)
            .map(|i| {
                let b = FixedVec {
                    data: vec![self.bit(i < k)],
                    params: p,
                };
                self.reshare(&b)
            })
            .collect())
    }

    fn open_inference_inputs(
        &self,
        model: &ShareVec,
        layer_dims: &[usize],
        data: &SharedDataset,
    ) -> Result<(FixedVec, FixedVec)> {
        let expected = param_count(layer_dims);
        if model.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: model.len(),
            });
        }
        if data.dim != layer_dims[0] {
            return Err(Error::DimensionMismatch {
                expected: layer_dims[0],
                actual: data.dim,
            });
        }
        if data.rows == 0 {
            return Err(Error::EmptyDataset);
        }
        Ok((model.open()?, data.values.open()?))
    }

    fn decode_dataset(&self, values: &FixedVec, data: &SharedDataset) -> Result<Dataset> {
        let reals = values.to_reals();
        let mut features = Vec::with_capacity(data.rows * data.dim);
        let mut labels = Vec::with_capacity(data.rows);
        for row in reals.chunks_exact(data.dim + 1) {
            features.extend_from_slice(&row[..data.dim]);
            let label = row[data.dim].round();
            if label < 0.0 {
                return Err(Error::InvalidLabel {
                    label: usize::MAX,
                    classes: data.classes,
                });
            }
            labels.push(label as usize);
        }
        Dataset::new(features, data.dim, labels, data.classes)
    }

    /// Per-row logits, in double precision or through the fixed-point path.
    fn logits(
        &self,
        layer_dims: &[usize],
        model: &FixedVec,
        values: &FixedVec,
        data: &SharedDataset,
    ) -> Result<Vec<Vec<f64>>> {
        let p = self.params();
        match self.inference {
            InferenceArithmetic::Real => {
                let net = MlpModel::from_fixed(layer_dims, model)?;
                let d = self.decode_dataset(values, data)?;
                d.rows().map(|x| net.forward(x)).collect()
            }
            InferenceArithmetic::Fixed => values
                .data
                .chunks_exact(data.dim + 1)
                .map(|row| {
                    let out = forward_fixed(layer_dims, model, &row[..data.dim])?;
                    Ok(out.iter().map(|&e| decode_fixed(e, &p)).collect())
                })
                .collect(),
        }
    }

    /// Shared accuracy of a shared model on a shared dataset.
    pub fn sec_inf(
        &mut self,
        model: &ShareVec,
        layer_dims: &[usize],
        data: &SharedDataset,
    ) -> Result<ShareVec> {
        let (w, values) = self.open_inference_inputs(model, layer_dims, data)?;
        let d = self.decode_dataset(&values, data)?;
        let logits = self.logits(layer_dims, &w, &values, data)?;
        let correct = logits
            .iter()
            .zip(&d.labels)
            .filter(|(l, &y)| argmax(l) == y)
            .count();
        let acc = correct as f64 / d.len() as f64;
        self.charge_ideal("sec_inf", model.len() + data.values.len(), 1);
        let out = FixedVec::from_reals(&[acc], self.params())?;
        Ok(self.reshare(&out))
    }

    /// Shared mean of the per-row maximum softmax probability.
    pub fn max_soft(
        &mut self,
        model: &ShareVec,
        layer_dims: &[usize],
        data: &SharedDataset,
    ) -> Result<ShareVec> {
        let (w, values) = self.open_inference_inputs(model, layer_dims, data)?;
        let logits = self.logits(layer_dims, &w, &values, data)?;
        let total: f64 = logits
            .iter()
            .map(|l| softmax(l).into_iter().fold(0.0, f64::max))
            .sum();
        let mean = total / data.rows as f64;
        self.charge_ideal("max_soft", model.len() + data.values.len(), 1);
        let out = FixedVec::from_reals(&[mean], self.params())?;
        Ok(self.reshare(&out))
    }
}
