//! The whole check recomputed in the clear, on the same fixed-point grid
//! the shared computation uses, so acceptance bits can be compared exactly.

use super::committee::CheckCommittee;
use super::outcome::CheckOutcome;
use super::plain::kept;
use super::{CheckParams, ScoreOverrides, ScoreVariant};
use crate::error::{Error, Result};
use crate::numerics::{accuracy, max_softmax_mean, Dataset, FixedParams, FixedVec, MlpModel};

#[derive(Clone, Copy, Debug)]
pub struct OracleRound<'a> {
    /// Encoded updates exactly as the clients share them.
    pub updates: &'a [FixedVec],
    pub validation: &'a [Dataset],
    pub global: &'a FixedVec,
    pub committee: &'a CheckCommittee,
    pub overrides: &'a ScoreOverrides,
}

/// Grid units: a real `x` is represented by the integer `round(x * 2^f)`.
struct Grid(FixedParams);

impl Grid {
    fn units(&self, x: f64) -> i128 {
        (x * self.0.scale()).round() as i128
    }

    fn real(&self, u: i128) -> f64 {
        u as f64 / self.0.scale()
    }

    fn signed(&self, v: &FixedVec) -> Vec<i128> {
        v.data.iter().map(|&e| self.0.to_signed(e)).collect()
    }
}

/// Signed division rounding halves away from zero.
fn div_round(a: i128, b: i128) -> i128 {
    let q = (a.abs() + b / 2) / b;
    if a < 0 {
        -q
    } else {
        q
    }
}

fn quantized(d: &Dataset, g: &Grid) -> Result<Dataset> {
    let features = d.features.iter().map(|&x| g.real(g.units(x))).collect();
    Dataset::new(features, d.dim, d.labels.clone(), d.classes)
}

/// Returns the outcome and the mean of accepted updates.
pub fn plaintext_oracle(
    round: &OracleRound,
    params: &CheckParams,
    fixed: FixedParams,
) -> Result<(CheckOutcome, Option<Vec<f64>>)> {
    let g = Grid(fixed);
    let m = round.updates.len();
    params.validate(m)?;
    if round.validation.len() != m || round.committee.clients() != m {
        return Err(Error::WrongLength {
            expected: m,
            actual: round.validation.len(),
        });
    }
    let dims = &params.layer_dims;
    let validation = round
        .validation
        .iter()
        .map(|d| quantized(d, &g))
        .collect::<Result<Vec<_>>>()?;
    let global_units = g.signed(round.global);
    let model_of = |units: &[i128]| MlpModel::from_params(dims, units.iter().map(|&u| g.real(u)).collect());
    let prev = model_of(&global_units)?;

    let mut score_matrix = Vec::with_capacity(m);
    let mut sums = Vec::with_capacity(m);
    let mut client_scores = Vec::with_capacity(m);
    let t = params.m_c / 2;
    for (i, u) in round.updates.iter().enumerate() {
        let w: Vec<i128> = global_units.iter().zip(g.signed(u)).map(|(a, b)| a + b).collect();
        let model = model_of(&w)?;
        let mut row = Vec::new();
        for &j in &round.committee.members[i] {
            let units = match round.overrides.get(&(i, j)) {
                Some(&v) => g.units(v),
                None => match params.variant {
                    ScoreVariant::Acc => {
                        g.units(accuracy(&model, &validation[j])?) - g.units(accuracy(&prev, &validation[j])?)
                    }
                    ScoreVariant::Prob => g.units(max_softmax_mean(&model, &validation[j])?),
                },
            };
            row.push(units);
        }
        if row.len() != 2 * params.m_c + 1 {
            return Err(Error::WrongLength {
                expected: 2 * params.m_c + 1,
                actual: row.len(),
            });
        }
        let mut sorted = row.clone();
        sorted.sort_unstable();
        let sum: i128 = sorted[t..sorted.len() - t].iter().sum();
        client_scores.push(g.real(div_round(sum, kept(params.m_c) as i128)));
        sums.push(sum);
        score_matrix.push(row.into_iter().map(|u| g.real(u)).collect());
    }

    // descending by trimmed sum, lower index first on ties
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by_key(|&i| (-sums[i], i));
    let mut topk_bits = vec![false; m];
    for &i in order.iter().take(params.keep(m)?) {
        topk_bits[i] = true;
    }

    let (norms, norm_bits) = if params.norm_check {
        let f = fixed.frac_bits;
        let norm_units: Vec<i128> = round
            .updates
            .iter()
            .map(|u| {
                let sq = g.signed(u).iter().map(|&e| e * e).sum::<i128>() >> f;
                g.units(g.real(sq).sqrt())
            })
            .collect();
        let mut sorted = norm_units.clone();
        sorted.sort_unstable();
        let median = if m % 2 == 1 {
            sorted[m / 2]
        } else {
            div_round(sorted[m / 2 - 1] + sorted[m / 2], 2)
        };
        let bound = (g.units(params.lambda) * median) >> f;
        (
            norm_units.iter().map(|&n| g.real(n)).collect(),
            norm_units.iter().map(|&n| n < bound).collect(),
        )
    } else {
        (Vec::new(), vec![true; m])
    };

    let accept_bits: Vec<bool> = topk_bits.iter().zip(&norm_bits).map(|(&a, &b)| a && b).collect();
    let accepted: Vec<Vec<f64>> = round
        .updates
        .iter()
        .zip(&accept_bits)
        .filter(|(_, &b)| b)
        .map(|(u, _)| u.to_reals())
        .collect();
    let mean = (!accepted.is_empty()).then(|| {
        let n = accepted.len() as f64;
        (0..accepted[0].len())
            .map(|k| accepted.iter().map(|u| u[k]).sum::<f64>() / n)
            .collect()
    });

    Ok((
        CheckOutcome {
            score_matrix,
            client_scores,
            norms,
            norm_bits,
            topk_bits,
            accept_bits,
        },
        mean,
    ))
}
