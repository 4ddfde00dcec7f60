use crate::error::{Error, Result};
use crate::numerics::{FixedParams, FixedVec, Ring};

/// Replicated 3-party sharing of a `FixedVec`.
///
/// The secret is split into additive components `s0 + s1 + s2 = x`
/// (mod `2^K`); party `i` holds the pair `(s_i, s_{i+1})`. Each component
/// is therefore stored twice, which is what lets any two parties
/// reconstruct and lets reconstruction detect tampered replicas.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShareVec {
    pub(crate) views: [[Vec<Ring>; 2]; 3],
    pub params: FixedParams,
}

impl ShareVec {
    pub(crate) fn from_components(params: FixedParams, comps: [Vec<Ring>; 3]) -> Self {
        let [s0, s1, s2] = comps;
        ShareVec {
            views: [
                [s0.clone(), s1.clone()],
                [s1, s2.clone()],
                [s2, s0],
            ],
            params,
        }
    }

    pub fn len(&self) -> usize {
        self.views[0][0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The pair of components held by `party`.
    pub fn view(&self, party: usize) -> (&[Ring], &[Ring]) {
        (&self.views[party][0], &self.views[party][1])
    }

    /// Overwrite one replica; used to simulate a misbehaving party.
    pub fn tamper(&mut self, party: usize, slot: usize, index: usize, value: Ring) {
        self.views[party][slot][index] = value & self.params.mask();
    }

    /// The additive components, checking that both replicas agree.
    pub(crate) fn components(&self) -> Result<[Vec<Ring>; 3]> {
        for i in 0..3 {
            // s_i is held as party i's first slot and party (i+2)'s second slot
            let (a, b) = (&self.views[i][0], &self.views[(i + 2) % 3][1]);
            if let Some(index) = a.iter().zip(b).position(|(x, y)| x != y) {
                return Err(Error::Integrity { party: i, index });
            }
        }
        Ok([
            self.views[0][0].clone(),
            self.views[1][0].clone(),
            self.views[2][0].clone(),
        ])
    }

    pub(crate) fn open(&self) -> Result<FixedVec> {
        let [s0, s1, s2] = self.components()?;
        let p = self.params;
        let data = s0
            .iter()
            .zip(&s1)
            .zip(&s2)
            .map(|((&a, &b), &c)| p.add(p.add(a, b), c))
            .collect();
        Ok(FixedVec { data, params: p })
    }

    /// Reconstruct from the views of two distinct parties only.
    pub fn open_pair(&self, a: usize, b: usize) -> Result<FixedVec> {
        if a == b || a > 2 || b > 2 {
            return Err(Error::config("parties", "need two distinct parties in 0..3"));
        }
        let mut comps: [Option<&Vec<Ring>>; 3] = [None, None, None];
        for party in [a, b] {
            comps[party] = Some(&self.views[party][0]);
            comps[(party + 1) % 3] = Some(&self.views[party][1]);
        }
        let p = self.params;
        let [s0, s1, s2] = comps.map(|c| c.expect("two parties cover all components"));
        let data = (0..self.len())
            .map(|k| p.add(p.add(s0[k], s1[k]), s2[k]))
            .collect();
        Ok(FixedVec { data, params: p })
    }

    /// Apply `f` to every component of both replicas.
    pub(crate) fn map_components(&self, f: impl Fn(Ring) -> Ring) -> ShareVec {
        ShareVec {
            views: self
                .views
                .clone()
                .map(|pair| pair.map(|v| v.into_iter().map(&f).collect())),
            params: self.params,
        }
    }

    pub(crate) fn zip_components(&self, other: &ShareVec, f: impl Fn(Ring, Ring) -> Ring) -> Result<ShareVec> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                actual: other.len(),
            });
        }
        let mut views = self.views.clone();
        for (party, pair) in views.iter_mut().enumerate() {
            for (slot, comp) in pair.iter_mut().enumerate() {
                for (v, &o) in comp.iter_mut().zip(&other.views[party][slot]) {
                    *v = f(*v, o);
                }
            }
        }
        Ok(ShareVec {
            views,
            params: self.params,
        })
    }

    /// Element `i` as a length-1 sharing.
    pub fn element(&self, i: usize) -> ShareVec {
        ShareVec {
            views: self.views.clone().map(|pair| pair.map(|v| vec![v[i]])),
            params: self.params,
        }
    }

    /// Concatenate sharings elementwise (a local relabelling).
    pub fn concat(parts: &[ShareVec]) -> Result<ShareVec> {
        let first = parts.first().ok_or(Error::EmptyDataset)?;
        let mut views: [[Vec<Ring>; 2]; 3] = Default::default();
        for part in parts {
            for party in 0..3 {
                for slot in 0..2 {
                    views[party][slot].extend_from_slice(&part.views[party][slot]);
                }
            }
        }
        Ok(ShareVec {
            views,
            params: first.params,
        })
    }
}
