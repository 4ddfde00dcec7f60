use std::collections::BTreeMap;

use rand::Rng;

use super::committee::CheckCommittee;
use super::outcome::SharedOutcome;
use super::plain::kept;
use super::{CheckParams, ScoreOverrides, ScoreVariant, SharedOverrides};
use crate::error::{Error, Result};
use crate::numerics::{decode_fixed, FixedVec};
use crate::sharing::{Mpc, ShareVec, SharedDataset};

/// Inputs to one check: everything the parties hold in shared form,
/// plus the public global model.
#[derive(Clone, Copy, Debug)]
pub struct SharedRound<'a> {
    pub updates: &'a [ShareVec],
    pub validation: &'a [SharedDataset],
    pub global: &'a FixedVec,
    pub committee: &'a CheckCommittee,
    pub overrides: &'a SharedOverrides,
}

/// What the aggregation reveals: the masked sum and the accepted count.
#[derive(Clone, Debug, PartialEq)]
pub struct Aggregate {
    pub sum: FixedVec,
    pub accepted: usize,
}

impl Aggregate {
    /// Mean of the accepted updates; `None` when nothing was accepted.
    pub fn mean(&self) -> Option<Vec<f64>> {
        (self.accepted > 0).then(|| {
            self.sum
                .to_reals()
                .into_iter()
                .map(|x| x / self.accepted as f64)
                .collect()
        })
    }
}

/// Validators share the scores they report directly.
pub fn share_overrides<R: Rng + ?Sized>(
    mpc: &mut Mpc,
    overrides: &ScoreOverrides,
    rng: &mut R,
) -> Result<SharedOverrides> {
    overrides
        .iter()
        .map(|(&key, &v)| Ok((key, mpc.share_reals(&[v], rng)?)))
        .collect()
}

/// Accuracy of `w_i` on `d_j` minus accuracy of the previous global model.
pub fn score_acc(
    mpc: &mut Mpc,
    w_i: &ShareVec,
    w_prev: &FixedVec,
    layer_dims: &[usize],
    d_j: &SharedDataset,
) -> Result<ShareVec> {
    let prev = mpc.share_public(w_prev);
    let before = mpc.sec_inf(&prev, layer_dims, d_j)?;
    let after = mpc.sec_inf(w_i, layer_dims, d_j)?;
    mpc.sub(&after, &before)
}

/// Mean maximum softmax probability of `w_i` on `d_j`.
pub fn score_prob(mpc: &mut Mpc, w_i: &ShareVec, layer_dims: &[usize], d_j: &SharedDataset) -> Result<ShareVec> {
    mpc.max_soft(w_i, layer_dims, d_j)
}

/// Sum of the middle entries of a sorted committee score list, and how
/// many entries were kept.
pub fn trimmed_sum(mpc: &mut Mpc, scores: &[ShareVec], m_c: usize) -> Result<(ShareVec, usize)> {
    if scores.len() != 2 * m_c + 1 {
        return Err(Error::WrongLength {
            expected: 2 * m_c + 1,
            actual: scores.len(),
        });
    }
    let (sorted, _) = mpc.sort_shared(scores, &[])?;
    let t = m_c / 2;
    let mut sum = sorted[t].clone();
    for s in &sorted[t + 1..sorted.len() - t] {
        sum = mpc.add(&sum, s)?;
    }
    Ok((sum, kept(m_c)))
}

pub fn trimmed_mean(mpc: &mut Mpc, scores: &[ShareVec], m_c: usize) -> Result<ShareVec> {
    let (sum, n) = trimmed_sum(mpc, scores, m_c)?;
    mpc.div_public(&sum, n as u64)
}

fn broadcast(x: &ShareVec, n: usize) -> Result<ShareVec> {
    ShareVec::concat(&vec![x.clone(); n])
}

fn split(x: &ShareVec) -> Vec<ShareVec> {
    (0..x.len()).map(|i| x.element(i)).collect()
}

/// Shared norms and the bits `norm_i < lambda * median(norms)`.
pub fn norm_check(mpc: &mut Mpc, updates: &[ShareVec], lambda: f64) -> Result<(Vec<ShareVec>, Vec<ShareVec>)> {
    let m = updates.len();
    if m == 0 {
        return Err(Error::EmptyDataset);
    }
    let mut norms = Vec::with_capacity(m);
    for u in updates {
        let sq = mpc.dot(u, u)?;
        norms.push(mpc.sqrt_shared(&sq)?);
    }
    let (sorted, _) = mpc.sort_shared(&norms, &[])?;
    let median = if m % 2 == 1 {
        sorted[m / 2].clone()
    } else {
        let pair = mpc.add(&sorted[m / 2 - 1], &sorted[m / 2])?;
        mpc.div_public(&pair, 2)?
    };
    let bound = mpc.scale_public(&median, lambda)?;
    let all = ShareVec::concat(&norms)?;
    let bits = mpc.comp_less(&all, &broadcast(&bound, m)?)?;
    Ok((norms, split(&bits)))
}

/// Bits marking the `keep` largest keys, in client order. Ties favour the
/// lower client index.
pub fn select_top_k(mpc: &mut Mpc, keys: &[ShareVec], keep: usize) -> Result<Vec<ShareVec>> {
    let m = keys.len();
    let neg: Vec<ShareVec> = keys.iter().map(|k| mpc.neg(k)).collect();
    let ids = (0..m).map(|i| mpc.constant(i as f64)).collect::<Result<Vec<_>>>()?;
    let (_, ranked_ids) = mpc.sort_shared(&neg, &ids)?;
    let bits = mpc.zero_one(keep, m)?;
    let (_, restored) = mpc.sort_shared(&ranked_ids, &bits)?;
    Ok(restored)
}

fn validate_round(round: &SharedRound, params: &CheckParams) -> Result<()> {
    let m = round.updates.len();
    params.validate(m)?;
    for (what, n) in [("validation", round.validation.len()), ("committee", round.committee.clients())] {
        if n != m {
            return Err(Error::config(what, format!("expected {m} entries, got {n}")));
        }
    }
    let size = 2 * params.m_c + 1;
    if let Some(c) = round.committee.members.iter().find(|c| c.len() != size) {
        return Err(Error::WrongLength {
            expected: size,
            actual: c.len(),
        });
    }
    Ok(())
}

/// Scores, trimmed means, top-k, the optional norm check and the final
/// acceptance bits. Nothing is reconstructed.
pub fn run_check(mpc: &mut Mpc, round: &SharedRound, params: &CheckParams) -> Result<SharedOutcome> {
    validate_round(round, params)?;
    let m = round.updates.len();
    let dims = &params.layer_dims;

    mpc.set_phase(Some("cross_check"));
    let mut baseline: BTreeMap<usize, ShareVec> = BTreeMap::new();
    let mut score_matrix = Vec::with_capacity(m);
    let mut sums = Vec::with_capacity(m);
    let mut client_scores = Vec::with_capacity(m);
    for (i, u) in round.updates.iter().enumerate() {
        let w_i = mpc.add_public(u, round.global)?;
        let mut row = Vec::with_capacity(round.committee.members[i].len());
        for &j in &round.committee.members[i] {
            if let Some(s) = round.overrides.get(&(i, j)) {
                row.push(s.clone());
                continue;
            }
            let d_j = &round.validation[j];
            let score = match params.variant {
                ScoreVariant::Prob => score_prob(mpc, &w_i, dims, d_j)?,
                ScoreVariant::Acc => {
                    if !baseline.contains_key(&j) {
                        let prev = mpc.share_public(round.global);
                        baseline.insert(j, mpc.sec_inf(&prev, dims, d_j)?);
                    }
                    let after = mpc.sec_inf(&w_i, dims, d_j)?;
                    mpc.sub(&after, &baseline[&j])?
                }
            };
            row.push(score);
        }
        let (sum, n) = trimmed_sum(mpc, &row, params.m_c)?;
        client_scores.push(mpc.div_public(&sum, n as u64)?);
        sums.push(sum);
        score_matrix.push(row);
    }

    // every client keeps the same count, so ranking sums ranks means
    mpc.set_phase(Some("top_k"));
    let topk_bits = select_top_k(mpc, &sums, params.keep(m)?)?;

    let (norms, norm_bits, accept_bits) = if params.norm_check {
        mpc.set_phase(Some("norm_check"));
        let (norms, norm_bits) = norm_check(mpc, round.updates, params.lambda)?;
        let accept = mpc.mult(&ShareVec::concat(&topk_bits)?, &ShareVec::concat(&norm_bits)?)?;
        (norms, norm_bits, split(&accept))
    } else {
        let one = mpc.constant(1.0)?;
        (Vec::new(), vec![one; m], topk_bits.clone())
    };
    mpc.set_phase(None);

    Ok(SharedOutcome {
        score_matrix,
        client_scores,
        norms,
        norm_bits,
        topk_bits,
        accept_bits,
    })
}

/// Mask each update by its acceptance bit, sum, and reveal the sum and
/// the number of accepted updates. These are the only reconstructions.
pub fn secure_aggregate(mpc: &mut Mpc, updates: &[ShareVec], accept_bits: &[ShareVec]) -> Result<Aggregate> {
    if updates.len() != accept_bits.len() || updates.is_empty() {
        return Err(Error::WrongLength {
            expected: updates.len(),
            actual: accept_bits.len(),
        });
    }
    mpc.set_phase(Some("aggregate"));
    let mut sum: Option<ShareVec> = None;
    let mut count: Option<ShareVec> = None;
    for (u, b) in updates.iter().zip(accept_bits) {
        let masked = mpc.mult(u, &broadcast(b, u.len())?)?;
        sum = Some(match sum {
            None => masked,
            Some(s) => mpc.add(&s, &masked)?,
        });
        count = Some(match count {
            None => b.clone(),
            Some(c) => mpc.add(&c, b)?,
        });
    }
    let (sum, count) = (sum.expect("non-empty"), count.expect("non-empty"));
    let sum = mpc.recon(&sum, "aggregate")?;
    let count = mpc.recon(&count, "accepted_count")?;
    mpc.set_phase(None);
    let accepted = decode_fixed(count.data[0], &mpc.params()).round().max(0.0) as usize;
    Ok(Aggregate { sum, accepted })
}
