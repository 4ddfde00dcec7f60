//! Cross-client validation over shares: committees score each update on
//! their own validation data, scores are trimmed and ranked, and only the
//! mean of accepted updates is reconstructed.

mod committee;
mod oracle;
mod outcome;
pub mod plain;
mod protocol;

pub use committee::{sample_committees, sample_committees_with, CheckCommittee};
pub use oracle::{plaintext_oracle, OracleRound};
pub use outcome::{write_debug_csv, CheckOutcome, DebugRecord, SharedOutcome};
pub use protocol::{
    norm_check, run_check, score_acc, score_prob, secure_aggregate, select_top_k, share_overrides,
    trimmed_mean, trimmed_sum, Aggregate, SharedRound,
};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sharing::ShareVec;

/// Which statistic a validator reports.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreVariant {
    /// Accuracy gain over the previous global model.
    #[default]
    Acc,
    /// Mean maximum softmax probability of the candidate model.
    Prob,
}

impl ScoreVariant {
    /// Smallest and largest attainable score.
    pub fn range(self, classes: usize) -> (f64, f64) {
        match self {
            ScoreVariant::Acc => (-1.0, 1.0),
            ScoreVariant::Prob => (1.0 / classes as f64, 1.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckParams {
    pub m_c: usize,
    /// Fraction of clients kept; `None` means `1 - m_c / m`.
    pub k_frac: Option<f64>,
    /// Multiplier on the median norm.
    pub lambda: f64,
    pub norm_check: bool,
    pub variant: ScoreVariant,
    pub layer_dims: Vec<usize>,
}

impl CheckParams {
    pub fn new(m_c: usize, variant: ScoreVariant, layer_dims: &[usize]) -> Self {
        CheckParams {
            m_c,
            k_frac: None,
            lambda: 1.5,
            norm_check: true,
            variant,
            layer_dims: layer_dims.to_vec(),
        }
    }

    /// Number of clients selected by top-k.
    pub fn keep(&self, m: usize) -> Result<usize> {
        let frac = self.k_frac.unwrap_or(1.0 - self.m_c as f64 / m as f64);
        if !(0.0..=1.0).contains(&frac) {
            return Err(Error::config("k_frac", "must lie in [0, 1]"));
        }
        Ok((frac * m as f64).round() as usize)
    }

    /// Entries dropped from each end of a sorted committee score list.
    pub fn trim(&self) -> usize {
        self.m_c / 2
    }

    pub fn validate(&self, m: usize) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::config("lambda", "must be positive"));
        }
        if self.layer_dims.len() < 2 {
            return Err(Error::config("layer_dims", "need input and output sizes"));
        }
        self.keep(m).map(|_| ())
    }
}

/// Scores reported directly by validators in place of computing them,
/// keyed by `(owner, validator)`.
pub type ScoreOverrides = BTreeMap<(usize, usize), f64>;

/// Overrides after the validators have secret-shared them.
pub type SharedOverrides = BTreeMap<(usize, usize), ShareVec>;
