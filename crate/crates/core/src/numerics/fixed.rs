//! Fixed-point encoding of reals into the ring Z_{2^K}.
//!
//! A real `x` is stored as `round(x * 2^f)` in two's complement modulo
//! `2^K`. Ring elements are carried in a `u128` and masked to `K` bits, so
//! the same code serves the default 64-bit ring and the 128-bit option.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A `K`-bit ring element. Only the low `ring_bits` bits are meaningful.
pub type Ring = u128;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedParams {
    pub ring_bits: u32,
    pub frac_bits: u32,
}

impl Default for FixedParams {
    fn default() -> Self {
        FixedParams {
            ring_bits: 64,
            frac_bits: 16,
        }
    }
}

impl FixedParams {
    pub fn new(ring_bits: u32, frac_bits: u32) -> Result<Self> {
        let p = FixedParams {
            ring_bits,
            frac_bits,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        // two bits of headroom above the fractional part, at most 128 bits total
        if self.frac_bits == 0 || self.ring_bits > 128 || self.frac_bits + 2 >= self.ring_bits {
            return Err(Error::InvalidFixedParams {
                ring_bits: self.ring_bits,
                frac_bits: self.frac_bits,
            });
        }
        Ok(())
    }

    #[inline]
    pub fn mask(&self) -> Ring {
        if self.ring_bits == 128 {
            u128::MAX
        } else {
            (1u128 << self.ring_bits) - 1
        }
    }

    /// `2^f`.
    #[inline]
    pub fn scale(&self) -> f64 {
        (self.frac_bits as f64).exp2()
    }

    /// Resolution of the encoding, `2^-f`.
    #[inline]
    pub fn ulp(&self) -> f64 {
        (-(self.frac_bits as f64)).exp2()
    }

    /// Exclusive bound on encodable magnitudes, `2^(K-f-1)`.
    #[inline]
    pub fn limit(&self) -> f64 {
        ((self.ring_bits - self.frac_bits - 1) as f64).exp2()
    }

    /// Bytes needed to send one ring element.
    #[inline]
    pub fn element_bytes(&self) -> u64 {
        self.ring_bits.div_ceil(8) as u64
    }

    #[inline]
    pub fn wrap(&self, v: Ring) -> Ring {
        v & self.mask()
    }

    /// Interpret a ring element as a signed `K`-bit integer.
    #[inline]
    pub fn to_signed(&self, e: Ring) -> i128 {
        let e = e & self.mask();
        if self.ring_bits == 128 {
            e as i128
        } else if e >> (self.ring_bits - 1) == 1 {
            e as i128 - (1i128 << self.ring_bits)
        } else {
            e as i128
        }
    }

    #[inline]
    pub fn from_signed(&self, v: i128) -> Ring {
        (v as u128) & self.mask()
    }

    #[inline]
    pub fn add(&self, a: Ring, b: Ring) -> Ring {
        a.wrapping_add(b) & self.mask()
    }

    #[inline]
    pub fn sub(&self, a: Ring, b: Ring) -> Ring {
        a.wrapping_sub(b) & self.mask()
    }

    #[inline]
    pub fn neg(&self, a: Ring) -> Ring {
        0u128.wrapping_sub(a) & self.mask()
    }

    #[inline]
    pub fn mul(&self, a: Ring, b: Ring) -> Ring {
        a.wrapping_mul(b) & self.mask()
    }

    /// Arithmetic right shift by `f`, applied to a double-scale product.
    #[inline]
    pub fn truncate(&self, e: Ring) -> Ring {
        self.from_signed(self.to_signed(e) >> self.frac_bits)
    }

    /// Fixed-point product: ring multiply followed by deterministic truncation.
    #[inline]
    pub fn mul_trunc(&self, a: Ring, b: Ring) -> Ring {
        self.truncate(self.mul(a, b))
    }

    /// Embed a small integer (e.g. a public count) with scale 1.
    #[inline]
    pub fn int(&self, v: i64) -> Ring {
        self.from_signed(v as i128)
    }
}

pub fn encode_fixed(x: f64, p: &FixedParams) -> Result<Ring> {
    let limit = p.limit();
    if !x.is_finite() || x.abs() >= limit {
        return Err(Error::Overflow { value: x, limit });
    }
    let v = (x * p.scale()).round() as i128;
    Ok(p.from_signed(v))
}

pub fn decode_fixed(e: Ring, p: &FixedParams) -> f64 {
    p.to_signed(e) as f64 / p.scale()
}

/// Round `x` to the nearest representable value.
pub fn quantize(x: f64, p: &FixedParams) -> Result<f64> {
    encode_fixed(x, p).map(|e| decode_fixed(e, p))
}

/// Round `x` to a representable value no larger in magnitude.
pub fn quantize_toward_zero(x: f64, p: &FixedParams) -> Result<f64> {
    let limit = p.limit();
    if !x.is_finite() || x.abs() >= limit {
        return Err(Error::Overflow { value: x, limit });
    }
    Ok((x * p.scale()).trunc() / p.scale())
}

/// A flat vector of ring elements sharing one set of fixed-point parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixedVec {
    pub data: Vec<Ring>,
    pub params: FixedParams,
}

impl FixedVec {
    pub fn zeros(len: usize, params: FixedParams) -> Self {
        FixedVec {
            data: vec![0; len],
            params,
        }
    }

    pub fn from_reals(xs: &[f64], params: FixedParams) -> Result<Self> {
        let data = xs
            .iter()
            .map(|&x| encode_fixed(x, &params))
            .collect::<Result<Vec<_>>>()?;
        Ok(FixedVec { data, params })
    }

    pub fn to_reals(&self) -> Vec<f64> {
        self.data
            .iter()
            .map(|&e| decode_fixed(e, &self.params))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn add(&self, other: &FixedVec) -> Result<FixedVec> {
        self.zip_with(other, |p, a, b| p.add(a, b))
    }

    pub fn sub(&self, other: &FixedVec) -> Result<FixedVec> {
        self.zip_with(other, |p, a, b| p.sub(a, b))
    }

    pub fn neg(&self) -> FixedVec {
        let p = self.params;
        FixedVec {
            data: self.data.iter().map(|&a| p.neg(a)).collect(),
            params: p,
        }
    }

    /// Elementwise fixed-point product with truncation.
    pub fn mul_trunc(&self, other: &FixedVec) -> Result<FixedVec> {
        self.zip_with(other, |p, a, b| p.mul_trunc(a, b))
    }

    fn zip_with(&self, other: &FixedVec, f: impl Fn(&FixedParams, Ring, Ring) -> Ring) -> Result<FixedVec> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                actual: other.len(),
            });
        }
        let p = self.params;
        Ok(FixedVec {
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(&p, a, b))
                .collect(),
            params: p,
        })
    }
}
