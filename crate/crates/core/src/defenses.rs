//! Plaintext baseline checks on clear updates. They accept or reject each
//! update; the caller averages the accepted ones.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::secure_check::plain::{l2_norm, median};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DefenseKind {
    NormBoundAdaptive,
    NormBoundPublic,
    NormBall,
    CosineSim,
    SlvrAcc,
    SlvrProb,
    FedavgPlain,
}

impl DefenseKind {
    pub const ALL: [DefenseKind; 7] = [
        DefenseKind::NormBoundAdaptive,
        DefenseKind::NormBoundPublic,
        DefenseKind::NormBall,
        DefenseKind::CosineSim,
        DefenseKind::SlvrAcc,
        DefenseKind::SlvrProb,
        DefenseKind::FedavgPlain,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DefenseKind::NormBoundAdaptive => "norm_bound_adaptive",
            DefenseKind::NormBoundPublic => "norm_bound_public",
            DefenseKind::NormBall => "norm_ball",
            DefenseKind::CosineSim => "cosine_sim",
            DefenseKind::SlvrAcc => "slvr_acc",
            DefenseKind::SlvrProb => "slvr_prob",
            DefenseKind::FedavgPlain => "fedavg_plain",
        }
    }

    pub fn default_lambda(self) -> f64 {
        match self {
            DefenseKind::NormBall => 1.0,
            DefenseKind::CosineSim => 0.5,
            _ => 1.5,
        }
    }

    /// Whether the check needs an update computed on public validation data.
    pub fn uses_public_data(self) -> bool {
        matches!(
            self,
            DefenseKind::NormBoundPublic | DefenseKind::NormBall | DefenseKind::CosineSim
        )
    }

    pub fn is_slvr(self) -> bool {
        matches!(self, DefenseKind::SlvrAcc | DefenseKind::SlvrProb)
    }
}

impl std::fmt::Display for DefenseKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DefenseConfig {
    pub kind: DefenseKind,
    /// Defaults per kind when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

impl DefenseConfig {
    pub fn new(kind: DefenseKind) -> Self {
        DefenseConfig { kind, lambda: None }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda.unwrap_or_else(|| self.kind.default_lambda())
    }

    pub fn validate(&self, public_rows: usize) -> Result<()> {
        let l = self.lambda();
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::config("defense.lambda", "must be positive"));
        }
        if self.kind.uses_public_data() && public_rows == 0 {
            return Err(Error::config("data.public_rows", "this defense needs public validation data"));
        }
        Ok(())
    }
}

/// Cosine similarity; zero when either vector is zero.
pub fn cosine(u: &[f64], v: &[f64]) -> f64 {
    let (nu, nv) = (l2_norm(u), l2_norm(v));
    if nu == 0.0 || nv == 0.0 {
        return 0.0;
    }
    u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() / (nu * nv)
}

fn distance(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// Threshold `lambda * median` of the reference norms: the previous
/// round's update norms, or the current ones in the first round.
pub fn adaptive_bound(updates: &[Vec<f64>], prev_norms: Option<&[f64]>, lambda: f64) -> Result<f64> {
    let current: Vec<f64>;
    let reference = match prev_norms {
        Some(p) if !p.is_empty() => p,
        _ => {
            current = updates.iter().map(|u| l2_norm(u)).collect();
            &current
        }
    };
    Ok(lambda * median(reference)?)
}

pub fn norm_bound_adaptive(updates: &[Vec<f64>], prev_norms: Option<&[f64]>, lambda: f64) -> Result<Vec<bool>> {
    let tau = adaptive_bound(updates, prev_norms, lambda)?;
    Ok(updates.iter().map(|u| l2_norm(u) < tau).collect())
}

pub fn norm_bound_public(updates: &[Vec<f64>], u_pubval: &[f64]) -> Vec<bool> {
    let tau = l2_norm(u_pubval);
    updates.iter().map(|u| l2_norm(u) < tau).collect()
}

pub fn norm_ball(updates: &[Vec<f64>], u_pubval: &[f64], lambda: f64) -> Vec<bool> {
    let tau = lambda * l2_norm(u_pubval);
    updates.iter().map(|u| distance(u, u_pubval) < tau).collect()
}

/// Threshold `lambda * cos(u_pubval, u_prev_global)`.
pub fn cosine_threshold(u_prev_global: &[f64], u_pubval: &[f64], lambda: f64) -> f64 {
    lambda * cosine(u_pubval, u_prev_global)
}

/// Accept when the cosine to the previous global update reaches the threshold.
pub fn cosine_sim(updates: &[Vec<f64>], u_prev_global: &[f64], u_pubval: &[f64], lambda: f64) -> Vec<bool> {
    let tau = cosine_threshold(u_prev_global, u_pubval, lambda);
    updates.iter().map(|u| cosine(u, u_prev_global) >= tau).collect()
}

/// Mean of the accepted updates; `None` if nothing was accepted.
pub fn masked_mean(updates: &[Vec<f64>], bits: &[bool]) -> Option<Vec<f64>> {
    let chosen: Vec<&Vec<f64>> = updates.iter().zip(bits).filter(|(_, &b)| b).map(|(u, _)| u).collect();
    let first = chosen.first()?;
    let n = chosen.len() as f64;
    Some(
        (0..first.len())
            .map(|k| chosen.iter().map(|u| u[k]).sum::<f64>() / n)
            .collect(),
    )
}
