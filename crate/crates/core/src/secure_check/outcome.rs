use std::io::Write;

use crate::error::Result;
use crate::numerics::decode_fixed;
use crate::sharing::{Mpc, ShareVec};

/// Everything the check computes, in the clear.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    /// `score_matrix[i][r]` is the score of client `i` by its `r`-th committee member.
    pub score_matrix: Vec<Vec<f64>>,
    /// Trimmed mean per client.
    pub client_scores: Vec<f64>,
    pub norms: Vec<f64>,
    pub norm_bits: Vec<bool>,
    pub topk_bits: Vec<bool>,
    pub accept_bits: Vec<bool>,
}

impl CheckOutcome {
    pub fn accepted(&self) -> usize {
        self.accept_bits.iter().filter(|&&b| b).count()
    }

    pub fn accept_string(&self) -> String {
        self.accept_bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

/// The check result as it exists inside the computation: all shared.
#[derive(Clone, Debug)]
pub struct SharedOutcome {
    pub score_matrix: Vec<Vec<ShareVec>>,
    pub client_scores: Vec<ShareVec>,
    pub norms: Vec<ShareVec>,
    pub norm_bits: Vec<ShareVec>,
    pub topk_bits: Vec<ShareVec>,
    pub accept_bits: Vec<ShareVec>,
}

impl SharedOutcome {
    /// Simulation-only view of the shared outcome. Not a protocol step and
    /// not logged as a reveal.
    pub fn peek(&self, mpc: &Mpc) -> Result<CheckOutcome> {
        let p = mpc.params();
        let real = |s: &ShareVec| -> Result<f64> { Ok(decode_fixed(mpc.peek(s)?.data[0], &p)) };
        let reals = |v: &[ShareVec]| v.iter().map(real).collect::<Result<Vec<_>>>();
        let bits = |v: &[ShareVec]| -> Result<Vec<bool>> {
            Ok(reals(v)?.into_iter().map(|x| x > 0.5).collect())
        };
        Ok(CheckOutcome {
            score_matrix: self
                .score_matrix
                .iter()
                .map(|row| reals(row))
                .collect::<Result<_>>()?,
            client_scores: reals(&self.client_scores)?,
            norms: reals(&self.norms)?,
            norm_bits: bits(&self.norm_bits)?,
            topk_bits: bits(&self.topk_bits)?,
            accept_bits: bits(&self.accept_bits)?,
        })
    }
}

/// A check outcome kept for the per-round debug dump.
#[derive(Clone, Debug, PartialEq)]
pub struct DebugRecord {
    pub round: usize,
    pub committees: Vec<Vec<usize>>,
    pub outcome: CheckOutcome,
}

/// One row per client and round: committee, its scores, trimmed score,
/// norm and bits.
pub fn write_debug_csv<W: Write>(out: W, records: &[DebugRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "round", "client", "committee", "scores", "score", "norm", "norm_bit", "topk_bit", "accept_bit",
    ])?;
    let join = |v: Vec<String>| v.join(";");
    for r in records {
        let o = &r.outcome;
        for i in 0..o.client_scores.len() {
            w.write_record([
                r.round.to_string(),
                i.to_string(),
                join(r.committees.get(i).map_or(vec![], |c| c.iter().map(|j| j.to_string()).collect())),
                join(o.score_matrix[i].iter().map(|s| s.to_string()).collect()),
                o.client_scores[i].to_string(),
                o.norms.get(i).map_or(String::new(), |n| n.to_string()),
                u8::from(o.norm_bits[i]).to_string(),
                u8::from(o.topk_bits[i]).to_string(),
                u8::from(o.accept_bits[i]).to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
