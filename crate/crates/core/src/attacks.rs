//! Poisoning attacks: simple update and label corruptions, the adaptive
//! attack tuned to each defense, and the extreme check-score override.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::defenses::{cosine, DefenseKind};
use crate::error::{Error, Result};
use crate::numerics::{accuracy, Dataset, MlpModel};
use crate::secure_check::plain::{l2_norm, median};
use crate::secure_check::{CheckCommittee, ScoreOverrides, ScoreVariant};

pub const EPSILON: f64 = 1e-6;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackKind {
    #[default]
    None,
    AdditiveNoise,
    SignFlip,
    LabelFlip,
    Adaptive,
}

impl AttackKind {
    pub const ALL: [AttackKind; 5] = [
        AttackKind::None,
        AttackKind::AdditiveNoise,
        AttackKind::SignFlip,
        AttackKind::LabelFlip,
        AttackKind::Adaptive,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AttackKind::None => "none",
            AttackKind::AdditiveNoise => "additive_noise",
            AttackKind::SignFlip => "sign_flip",
            AttackKind::LabelFlip => "label_flip",
            AttackKind::Adaptive => "adaptive",
        }
    }
}

impl std::fmt::Display for AttackKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Geometric grid of step sizes for the adaptive search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Default for LambdaGrid {
    fn default() -> Self {
        LambdaGrid {
            min: 1e-5,
            max: 1e-1,
            points: 20,
        }
    }
}

impl LambdaGrid {
    /// Ascending grid values.
    pub fn values(&self) -> Result<Vec<f64>> {
        if !(self.min > 0.0 && self.max >= self.min && self.points > 0) {
            return Err(Error::config("attack.grid", "need 0 < min <= max and at least one point"));
        }
        if self.points == 1 {
            return Ok(vec![self.min]);
        }
        let ratio = (self.max / self.min).ln() / (self.points - 1) as f64;
        Ok((0..self.points)
            .map(|k| {
                if k + 1 == self.points {
                    self.max
                } else {
                    self.min * (ratio * k as f64).exp()
                }
            })
            .collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackConfig {
    #[serde(default)]
    pub kind: AttackKind,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default)]
    pub grid: LambdaGrid,
    #[serde(default)]
    pub extreme_manipulation: bool,
}

fn default_sigma() -> f64 {
    1.0
}

impl Default for AttackConfig {
    fn default() -> Self {
        AttackConfig {
            kind: AttackKind::None,
            sigma: default_sigma(),
            grid: LambdaGrid::default(),
            extreme_manipulation: false,
        }
    }
}

impl AttackConfig {
    pub fn new(kind: AttackKind) -> Self {
        AttackConfig { kind, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::config("attack.sigma", "must be non-negative"));
        }
        self.grid.values().map(|_| ())
    }
}

/// What the colluding malicious clients know: their own clean data and
/// clean updates, the public model and whatever thresholds are public.
#[derive(Clone, Debug)]
pub struct AdversaryView {
    pub clean_data: Dataset,
    pub clean_updates: Vec<Vec<f64>>,
    pub global: MlpModel,
    pub defense: DefenseKind,
}

impl AdversaryView {
    /// Mean of the malicious clients' clean updates.
    pub fn mean_update(&self) -> Result<Vec<f64>> {
        let first = self.clean_updates.first().ok_or(Error::EmptyDataset)?;
        let n = self.clean_updates.len() as f64;
        Ok((0..first.len())
            .map(|k| self.clean_updates.iter().map(|u| u[k]).sum::<f64>() / n)
            .collect())
    }
}

pub fn additive_noise<R: Rng + ?Sized>(u: &[f64], sigma: f64, rng: &mut R) -> Result<Vec<f64>> {
    if sigma == 0.0 {
        return Ok(u.to_vec());
    }
    let noise = Normal::new(0.0, sigma).map_err(|e| Error::config("attack.sigma", e.to_string()))?;
    Ok(u.iter().map(|x| x + noise.sample(rng)).collect())
}

pub fn sign_flip(u: &[f64]) -> Vec<f64> {
    u.iter().map(|x| -x).collect()
}

/// Label `l` becomes `L - l - 1`.
pub fn label_flip(d: &Dataset) -> Dataset {
    let mut out = d.clone();
    out.labels.iter_mut().for_each(|l| *l = d.classes - *l - 1);
    out
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Estimated direction of the clean global change.
pub fn estimate_direction(view: &AdversaryView) -> Result<Vec<f64>> {
    Ok(view.mean_update()?.into_iter().map(sign).collect())
}

/// `-s * (tau - eps) / sqrt(d)`: norm just under `tau`.
pub fn adaptive_normbound(view: &AdversaryView, tau: f64) -> Result<Vec<f64>> {
    if tau <= EPSILON {
        return Err(Error::config("tau", "must exceed the safety margin"));
    }
    let s = estimate_direction(view)?;
    let c = (tau - EPSILON) / (s.len() as f64).sqrt();
    Ok(s.iter().map(|x| -x * c).collect())
}

/// `u_pubval - s * min(tau - eps, (tau - eps) / sqrt(d))`: inside the ball.
pub fn adaptive_normball(view: &AdversaryView, u_pubval: &[f64], tau: f64) -> Result<Vec<f64>> {
    if tau <= EPSILON {
        return Err(Error::config("tau", "must exceed the safety margin"));
    }
    let s = estimate_direction(view)?;
    if s.len() != u_pubval.len() {
        return Err(Error::DimensionMismatch {
            expected: s.len(),
            actual: u_pubval.len(),
        });
    }
    let step = (tau - EPSILON).min((tau - EPSILON) / (s.len() as f64).sqrt());
    Ok(u_pubval.iter().zip(&s).map(|(p, x)| p - x * step).collect())
}

/// The chosen step and the update every malicious client submits.
#[derive(Clone, Debug, PartialEq)]
pub struct AdaptiveChoice {
    pub lambda: f64,
    pub update: Vec<f64>,
}

/// Search the grid from the largest step down, returning the first step
/// that `accept` admits, or the smallest step if none is admitted.
fn search_grid(
    view: &AdversaryView,
    grid: &[f64],
    mut accept: impl FnMut(&[f64]) -> Result<bool>,
) -> Result<AdaptiveChoice> {
    let base = view.mean_update()?;
    let s = estimate_direction(view)?;
    let step = |lambda: f64| -> Vec<f64> { base.iter().zip(&s).map(|(b, x)| b - lambda * x).collect() };
    let mut descending = grid.to_vec();
    descending.sort_by(|a, b| b.total_cmp(a));
    for &lambda in &descending {
        let update = step(lambda);
        if accept(&update)? {
            return Ok(AdaptiveChoice { lambda, update });
        }
    }
    let lambda = *descending.last().ok_or(Error::config("attack.grid", "empty grid"))?;
    Ok(AdaptiveChoice {
        lambda,
        update: step(lambda),
    })
}

/// Largest step whose update still meets the public cosine threshold.
pub fn adaptive_cosine(view: &AdversaryView, u_prev_global: &[f64], tau: f64, grid: &[f64]) -> Result<AdaptiveChoice> {
    search_grid(view, grid, |u| Ok(cosine(u, u_prev_global) >= tau))
}

/// Accuracy on the adversary's data of each malicious clean model.
pub fn clean_accuracies(view: &AdversaryView) -> Result<Vec<f64>> {
    view.clean_updates
        .iter()
        .map(|u| accuracy(&view.global.with_update(u)?, &view.clean_data))
        .collect()
}

/// Largest step whose poisoned model scores in the top half of the clean
/// models on the adversary's own data.
pub fn adaptive_slvr(view: &AdversaryView, grid: &[f64]) -> Result<AdaptiveChoice> {
    let bar = median(&clean_accuracies(view)?)?;
    search_grid(view, grid, |u| {
        Ok(accuracy(&view.global.with_update(u)?, &view.clean_data)? >= bar)
    })
}

/// Malicious validators score malicious owners at the top of the range
/// and honest owners at the bottom.
pub fn extreme_overrides(
    committee: &CheckCommittee,
    malicious: &[bool],
    variant: ScoreVariant,
    classes: usize,
) -> ScoreOverrides {
    let (lo, hi) = variant.range(classes);
    let mut out = ScoreOverrides::new();
    for (i, members) in committee.members.iter().enumerate() {
        for &j in members {
            if malicious[j] {
                out.insert((i, j), if malicious[i] { hi } else { lo });
            }
        }
    }
    out
}

/// Apply the extreme override to a clear score matrix laid out like the
/// committee lists.
pub fn extreme_manipulation_hook(
    scores: &[Vec<f64>],
    committee: &CheckCommittee,
    malicious: &[bool],
    variant: ScoreVariant,
    classes: usize,
) -> Vec<Vec<f64>> {
    let (lo, hi) = variant.range(classes);
    scores
        .iter()
        .zip(&committee.members)
        .enumerate()
        .map(|(i, (row, members))| {
            row.iter()
                .zip(members)
                .map(|(&s, &j)| match (malicious[j], malicious[i]) {
                    (false, _) => s,
                    (true, true) => hi,
                    (true, false) => lo,
                })
                .collect()
        })
        .collect()
}

/// Norm of an update, for callers checking attack invariants.
pub fn update_norm(u: &[f64]) -> f64 {
    l2_norm(u)
}
