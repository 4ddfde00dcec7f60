use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::ledger::CommLedger;
use super::prf::PrfKey;
use super::shares::ShareVec;
use crate::error::{Error, Result};
use crate::numerics::{encode_fixed, Dataset, FixedParams, FixedVec, Ring};

/// How `mult` and `dot` are executed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultMode {
    /// Local cross terms, zero-share masking and one resharing message per party.
    #[default]
    Protocol,
    /// Reconstruct, multiply and reshare inside a sealed functionality.
    Ideal,
}

/// Arithmetic used inside the inference functionalities.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InferenceArithmetic {
    /// Evaluate the classifier in double precision on the decoded inputs.
    #[default]
    Real,
    /// Evaluate with the fixed-point forward pass.
    Fixed,
}

/// One of the three computing parties.
#[derive(Clone, Debug)]
pub struct Party {
    pub id: usize,
    /// Key shared with party `id + 1`.
    next_key: PrfKey,
    /// Key shared with party `id - 1`.
    prev_key: PrfKey,
    common: PrfKey,
    counters: BTreeMap<String, u64>,
    pub bytes_sent: u64,
    pub bytes_received: u64,
}

impl Party {
    fn common_stream(&mut self, tag: &str) -> ChaCha20Rng {
        let ctr = self.counters.entry(tag.to_string()).or_insert(0);
        let rng = self.common.stream(tag, *ctr);
        *ctr += 1;
        rng
    }

    pub fn counter(&self, tag: &str) -> u64 {
        self.counters.get(tag).copied().unwrap_or(0)
    }

    /// This party's component of a fresh sharing of zero.
    fn zero_component(&self, counter: u64, len: usize, p: &FixedParams) -> Vec<Ring> {
        let mut mine = self.next_key.stream("zero", counter);
        let mut theirs = self.prev_key.stream("zero", counter);
        (0..len)
            .map(|_| p.sub(p.wrap(mine.random()), p.wrap(theirs.random())))
            .collect()
    }
}

/// A validation dataset shared row by row: each row is its features
/// followed by the label, all fixed-point encoded.
#[derive(Clone, Debug)]
pub struct SharedDataset {
    pub values: ShareVec,
    pub rows: usize,
    pub dim: usize,
    pub classes: usize,
}

/// One execution of the three-party computation: party key material,
/// the communication ledger and the audit log of public reconstructions.
#[derive(Clone, Debug)]
pub struct Mpc {
    params: FixedParams,
    parties: [Party; 3],
    pub(crate) ledger: CommLedger,
    reveals: Vec<String>,
    /// Randomness of the sealed functionalities when they reshare outputs.
    pub(crate) dealer: ChaCha20Rng,
    pub mult_mode: MultMode,
    pub inference: InferenceArithmetic,
    phase: Option<String>,
    zero_counter: u64,
}

impl Mpc {
    /// Key setup: pairwise keys for every pair of parties plus one common key.
    pub fn setup(params: FixedParams, seed: u64) -> Self {
        let pair = [
            PrfKey::derive(seed, "pair/0-1"),
            PrfKey::derive(seed, "pair/1-2"),
            PrfKey::derive(seed, "pair/2-0"),
        ];
        let common = PrfKey::derive(seed, "common");
        let parties = [0, 1, 2].map(|id| Party {
            id,
            next_key: pair[id],
            prev_key: pair[(id + 2) % 3],
            common,
            counters: BTreeMap::new(),
            bytes_sent: 0,
            bytes_received: 0,
        });
        let mut seed_bytes = [0u8; 32];
        PrfKey::derive(seed, "dealer").stream("dealer", 0).fill(&mut seed_bytes);
        Mpc {
            params,
            parties,
            ledger: CommLedger::default(),
            reveals: Vec::new(),
            dealer: ChaCha20Rng::from_seed(seed_bytes),
            mult_mode: MultMode::default(),
            inference: InferenceArithmetic::default(),
            phase: None,
            zero_counter: 0,
        }
    }

    pub fn params(&self) -> FixedParams {
        self.params
    }

    pub fn parties(&self) -> &[Party; 3] {
        &self.parties
    }

    pub fn ledger(&self) -> &CommLedger {
        &self.ledger
    }

    pub fn take_ledger(&mut self) -> CommLedger {
        std::mem::take(&mut self.ledger)
    }

    /// Labels of every public reconstruction performed so far.
    pub fn reveals(&self) -> &[String] {
        &self.reveals
    }

    pub fn clear_reveals(&mut self) {
        self.reveals.clear();
    }

    /// Prefix subsequent ledger charges with `phase/`.
    pub fn set_phase(&mut self, phase: Option<&str>) {
        self.phase = phase.map(str::to_string);
    }

    fn key(&self, name: &str) -> String {
        match &self.phase {
            Some(p) => format!("{p}/{name}"),
            None => name.to_string(),
        }
    }

    fn charge(&mut self, name: &str, bytes: u64, messages: u64, rounds: u64) {
        let key = self.key(name);
        self.ledger.charge(&key, bytes, messages, rounds);
    }

    /// Size of a replicated sharing of `n` elements across all parties.
    fn share_bytes(&self, n: usize) -> u64 {
        6 * n as u64 * self.params.element_bytes()
    }

    /// Synthetic cost of a sealed functionality: input shares in, output shares out.
    pub(crate) fn charge_ideal(&mut self, name: &str, inputs: usize, outputs: usize) {
        let eb = self.params.element_bytes();
        for p in &mut self.parties {
            p.bytes_sent += 2 * inputs as u64 * eb;
            p.bytes_received += 2 * outputs as u64 * eb;
        }
        let bytes = self.share_bytes(inputs) + self.share_bytes(outputs);
        self.charge(name, bytes, 6, 2);
    }

    /// Common randomness: every party derives the same value from `(kappa, tag, counter)`.
    pub fn rand_common(&mut self, tag: &str) -> u64 {
        let draws = self.parties.each_mut().map(|p| p.common_stream(tag).random::<u64>());
        debug_assert!(draws.iter().all(|&d| d == draws[0]));
        draws[0]
    }

    /// A generator seeded from common randomness, for sampling structures
    /// such as committees that all parties must agree on.
    pub fn common_rng(&mut self, tag: &str) -> ChaCha20Rng {
        let mut seed = [0u8; 32];
        let mut streams = self.parties.each_mut().map(|p| p.common_stream(tag));
        streams[0].fill(&mut seed);
        ChaCha20Rng::from_seed(seed)
    }

    /// Input sharing by a client: two random components and a correction.
    pub fn share<R: Rng + ?Sized>(&mut self, secret: &FixedVec, rng: &mut R) -> ShareVec {
        let p = self.params;
        let n = secret.len();
        let s0: Vec<Ring> = (0..n).map(|_| p.wrap(rng.random())).collect();
        let s1: Vec<Ring> = (0..n).map(|_| p.wrap(rng.random())).collect();
        let s2 = secret
            .data
            .iter()
            .zip(s0.iter().zip(&s1))
            .map(|(&x, (&a, &b))| p.sub(p.sub(x, a), b))
            .collect();
        let eb = p.element_bytes();
        for party in &mut self.parties {
            party.bytes_received += 2 * n as u64 * eb;
        }
        self.charge("share", self.share_bytes(n), 3, 1);
        ShareVec::from_components(p, [s0, s1, s2])
    }

    pub fn share_reals<R: Rng + ?Sized>(&mut self, xs: &[f64], rng: &mut R) -> Result<ShareVec> {
        let v = FixedVec::from_reals(xs, self.params)?;
        Ok(self.share(&v, rng))
    }

    pub fn share_dataset<R: Rng + ?Sized>(&mut self, d: &Dataset, rng: &mut R) -> Result<SharedDataset> {
        let mut flat = Vec::with_capacity(d.len() * (d.dim + 1));
        for (x, &y) in d.rows().zip(&d.labels) {
            flat.extend_from_slice(x);
            flat.push(y as f64);
        }
        let values = self.share_reals(&flat, rng)?;
        Ok(SharedDataset {
            values,
            rows: d.len(),
            dim: d.dim,
            classes: d.classes,
        })
    }

    /// Sharing of a public value with no communication: `s0 = x`, `s1 = s2 = 0`.
    pub fn share_public(&self, v: &FixedVec) -> ShareVec {
        let n = v.len();
        ShareVec::from_components(self.params, [v.data.clone(), vec![0; n], vec![0; n]])
    }

    pub fn constant(&self, x: f64) -> Result<ShareVec> {
        Ok(self.share_public(&FixedVec::from_reals(&[x], self.params)?))
    }

    /// Public reconstruction. Every party sends the component its
    /// successor lacks; replicas are compared and a mismatch aborts.
    pub fn recon(&mut self, s: &ShareVec, label: &str) -> Result<FixedVec> {
        let out = s.open()?;
        let eb = self.params.element_bytes();
        let n = s.len() as u64;
        for p in &mut self.parties {
            p.bytes_sent += n * eb;
            p.bytes_received += n * eb;
        }
        self.charge("recon", 3 * n * eb, 3, 1);
        self.reveals.push(label.to_string());
        Ok(out)
    }

    /// Read a shared value without recording a protocol reveal. For
    /// simulation metrics and debug dumps only.
    pub fn peek(&self, s: &ShareVec) -> Result<FixedVec> {
        s.open()
    }

    /// `a*x + b*y` with public integer coefficients; purely local.
    pub fn lin(&self, a: i64, x: &ShareVec, b: i64, y: &ShareVec) -> Result<ShareVec> {
        let p = self.params;
        let (ra, rb) = (p.int(a), p.int(b));
        x.zip_components(y, |u, v| p.add(p.mul(ra, u), p.mul(rb, v)))
    }

    pub fn add(&self, x: &ShareVec, y: &ShareVec) -> Result<ShareVec> {
        self.lin(1, x, 1, y)
    }

    pub fn sub(&self, x: &ShareVec, y: &ShareVec) -> Result<ShareVec> {
        self.lin(1, x, -1, y)
    }

    pub fn neg(&self, x: &ShareVec) -> ShareVec {
        let p = self.params;
        x.map_components(|u| p.neg(u))
    }

    /// Add a public vector; only the holders of component `s0` change it.
    pub fn add_public(&self, x: &ShareVec, c: &FixedVec) -> Result<ShareVec> {
        if x.len() != c.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                actual: c.len(),
            });
        }
        let p = self.params;
        let mut out = x.clone();
        for (k, &v) in c.data.iter().enumerate() {
            out.views[0][0][k] = p.add(out.views[0][0][k], v);
            out.views[2][1][k] = p.add(out.views[2][1][k], v);
        }
        Ok(out)
    }

    /// Sum of all elements of a sharing, as a length-1 sharing.
    pub fn sum_elements(&self, x: &ShareVec) -> ShareVec {
        let p = self.params;
        ShareVec {
            views: x
                .views
                .clone()
                .map(|pair| pair.map(|v| vec![v.iter().fold(0, |a, &b| p.add(a, b))])),
            params: p,
        }
    }

    /// Multiply by a public real, then truncate.
    pub fn scale_public(&mut self, x: &ShareVec, c: f64) -> Result<ShareVec> {
        let p = self.params;
        let rc = encode_fixed(c, &p)?;
        let scaled = x.map_components(|u| p.mul(rc, u));
        self.truncate(&scaled)
    }

    /// Divide by a public positive integer, rounding to nearest, as a sealed step.
    pub fn div_public(&mut self, x: &ShareVec, divisor: u64) -> Result<ShareVec> {
        if divisor == 0 {
            return Err(Error::config("divisor", "must be positive"));
        }
        let v = x.open()?;
        let p = self.params;
        let d = divisor as i128;
        let q = FixedVec {
            data: v
                .data
                .iter()
                .map(|&e| {
                    let s = p.to_signed(e);
                    let r = if s >= 0 { (s + d / 2) / d } else { -((-s + d / 2) / d) };
                    p.from_signed(r)
                })
                .collect(),
            params: p,
        };
        self.charge_ideal("trunc", x.len(), x.len());
        Ok(self.reshare(&q))
    }

    /// Deterministic truncation of double-scale values, as a sealed step.
    fn truncate(&mut self, x: &ShareVec) -> Result<ShareVec> {
        let v = x.open()?;
        let p = self.params;
        let t = FixedVec {
            data: v.data.iter().map(|&e| p.truncate(e)).collect(),
            params: p,
        };
        self.charge_ideal("trunc", x.len(), x.len());
        Ok(self.reshare(&t))
    }

    /// Fresh random sharing of a value known to a sealed functionality.
    pub(crate) fn reshare(&mut self, v: &FixedVec) -> ShareVec {
        let p = self.params;
        let n = v.len();
        let s0: Vec<Ring> = (0..n).map(|_| p.wrap(self.dealer.random())).collect();
        let s1: Vec<Ring> = (0..n).map(|_| p.wrap(self.dealer.random())).collect();
        let s2 = v
            .data
            .iter()
            .zip(s0.iter().zip(&s1))
            .map(|(&x, (&a, &b))| p.sub(p.sub(x, a), b))
            .collect();
        ShareVec::from_components(p, [s0, s1, s2])
    }

    /// Turn 3-out-of-3 additive components into a replicated sharing:
    /// each party masks its component with a zero share and sends it to
    /// its predecessor. One ring element per party per output element.
    fn reshare_additive(&mut self, z: [Vec<Ring>; 3]) -> ShareVec {
        let p = self.params;
        let n = z[0].len();
        let ctr = self.zero_counter;
        self.zero_counter += 1;
        let masked: [Vec<Ring>; 3] = [0, 1, 2].map(|i| {
            let alpha = self.parties[i].zero_component(ctr, n, &p);
            z[i].iter().zip(&alpha).map(|(&a, &b)| p.add(a, b)).collect()
        });
        let eb = p.element_bytes();
        for party in &mut self.parties {
            party.bytes_sent += n as u64 * eb;
            party.bytes_received += n as u64 * eb;
        }
        self.charge("mult", 3 * n as u64 * eb, 3, 1);
        ShareVec::from_components(p, masked)
    }

    /// Local cross terms: party `i` computes `x_i y_i + x_i y_{i+1} + x_{i+1} y_i`.
    fn cross_terms(&self, x: &ShareVec, y: &ShareVec, k: usize, i: usize) -> Ring {
        let p = self.params;
        let (xi, xn) = (x.views[i][0][k], x.views[i][1][k]);
        let (yi, yn) = (y.views[i][0][k], y.views[i][1][k]);
        p.add(p.add(p.mul(xi, yi), p.mul(xi, yn)), p.mul(xn, yi))
    }

    /// Elementwise fixed-point product.
    pub fn mult(&mut self, x: &ShareVec, y: &ShareVec) -> Result<ShareVec> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                actual: y.len(),
            });
        }
        match self.mult_mode {
            MultMode::Protocol => {
                let z = [0, 1, 2].map(|i| (0..x.len()).map(|k| self.cross_terms(x, y, k, i)).collect());
                let product = self.reshare_additive(z);
                self.truncate(&product)
            }
            MultMode::Ideal => {
                let (a, b) = (x.open()?, y.open()?);
                let z = a.mul_trunc(&b)?;
                self.charge_ideal("mult", 2 * x.len(), x.len());
                Ok(self.reshare(&z))
            }
        }
    }

    /// Inner product with a single resharing and a single truncation.
    pub fn dot(&mut self, x: &ShareVec, y: &ShareVec) -> Result<ShareVec> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                actual: y.len(),
            });
        }
        let p = self.params;
        match self.mult_mode {
            MultMode::Protocol => {
                let z = [0, 1, 2].map(|i| {
                    vec![(0..x.len()).fold(0, |acc, k| p.add(acc, self.cross_terms(x, y, k, i)))]
                });
                let product = self.reshare_additive(z);
                self.truncate(&product)
            }
            MultMode::Ideal => {
                let (a, b) = (x.open()?, y.open()?);
                let acc = a.data.iter().zip(&b.data).fold(0, |acc, (&u, &v)| p.add(acc, p.mul(u, v)));
                self.charge_ideal("mult", 2 * x.len(), 1);
                Ok(self.reshare(&FixedVec {
                    data: vec![p.truncate(acc)],
                    params: p,
                }))
            }
        }
    }
}
