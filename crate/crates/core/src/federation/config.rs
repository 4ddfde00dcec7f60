//! Declarative experiment description, read from TOML.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::attacks::{AttackConfig, AttackKind};
use crate::defenses::{DefenseConfig, DefenseKind};
use crate::error::{Error, Result};
use crate::numerics::{FixedParams, TrainOptions};
use crate::secure_check::{CheckCommittee, ScoreVariant};
use crate::sharing::{InferenceArithmetic, MultMode};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    pub rounds: usize,
    pub population: PopulationConfig,
    #[serde(default)]
    pub data: DataConfig,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub training: TrainOptions,
    #[serde(default)]
    pub fixed: FixedParams,
    #[serde(default)]
    pub check: CheckConfig,
    pub defense: DefenseConfig,
    #[serde(default)]
    pub attack: AttackConfig,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub shifts: Vec<ShiftEvent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationConfig {
    pub clients: usize,
    #[serde(default)]
    pub malicious: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_samples")]
    pub samples_per_client: usize,
    /// Rows each client contributes to validation per round.
    #[serde(default = "default_validation_rows")]
    pub validation_rows: usize,
    #[serde(default = "default_public_rows")]
    pub public_rows: usize,
    /// Test rows per data distribution.
    #[serde(default = "default_test_rows")]
    pub test_rows: usize,
    /// Whether clients added by a join event are honest.
    #[serde(default = "yes")]
    pub joiners_honest: bool,
}

fn default_alpha() -> f64 {
    0.5
}
fn default_samples() -> usize {
    50
}
fn default_validation_rows() -> usize {
    10
}
fn default_public_rows() -> usize {
    100
}
fn default_test_rows() -> usize {
    500
}
fn yes() -> bool {
    true
}

/// Gaussian class clusters. Class `c` of a distribution has mean
/// `separation` on coordinate `(axis + c) mod dim`, plus the offset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub dim: usize,
    pub classes: usize,
    pub separation: f64,
    pub noise: f64,
    pub distributions: Vec<DistributionSpec>,
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig {
            dim: 4,
            classes: 2,
            separation: 2.0,
            noise: 1.0,
            distributions: vec![DistributionSpec::default()],
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionSpec {
    #[serde(default)]
    pub axis: usize,
    /// Added to every row; empty means no shift.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub offset: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// Hidden layer widths; empty gives a logistic model.
    #[serde(default)]
    pub hidden: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckConfig {
    /// Committee parameter; defaults to the malicious count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_c: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_frac: Option<f64>,
    #[serde(default = "default_norm_lambda")]
    pub lambda: f64,
    #[serde(default = "yes")]
    pub norm_check: bool,
    #[serde(default)]
    pub resample_committees: bool,
    #[serde(default)]
    pub freeze_validation: bool,
    #[serde(default)]
    pub mult_mode: MultMode,
    #[serde(default)]
    pub inference: InferenceArithmetic,
}

fn default_norm_lambda() -> f64 {
    1.5
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            m_c: None,
            k_frac: None,
            lambda: default_norm_lambda(),
            norm_check: true,
            resample_committees: false,
            freeze_validation: false,
            mult_mode: MultMode::default(),
            inference: InferenceArithmetic::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftKind {
    /// Existing clients switch to the target distribution.
    Evolve,
    /// New clients holding target-distribution data join.
    Join,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShiftEvent {
    /// Applied before this round runs.
    pub round: usize,
    pub kind: ShiftKind,
    pub count: usize,
    pub distribution: usize,
}

/// Grid axes for a sweep: every defense against every attack, averaged
/// over the seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub defenses: Vec<DefenseKind>,
    pub attacks: Vec<AttackKind>,
    pub seeds: Vec<u64>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config {
            field: "config".into(),
            reason: e.message().to_string() + &span_hint(text, e.span()),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    /// Canonical form: every field spelled out, defaults included.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config("config", e.to_string()))
    }

    pub fn layer_dims(&self) -> Vec<usize> {
        let mut dims = vec![self.data.dim];
        dims.extend(&self.model.hidden);
        dims.push(self.data.classes);
        dims
    }

    pub fn m_c(&self) -> usize {
        self.check.m_c.unwrap_or(self.population.malicious)
    }

    pub fn variant(&self) -> ScoreVariant {
        match self.defense.kind {
            DefenseKind::SlvrProb => ScoreVariant::Prob,
            _ => ScoreVariant::Acc,
        }
    }

    /// Largest population reached over the run.
    pub fn max_clients(&self) -> usize {
        self.population.clients
            + self
                .shifts
                .iter()
                .filter(|s| s.kind == ShiftKind::Join)
                .map(|s| s.count)
                .sum::<usize>()
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.population;
        let d = &self.data;
        if p.clients == 0 {
            return Err(Error::config("population.clients", "must be positive"));
        }
        if p.malicious > p.clients {
            return Err(Error::config("population.malicious", "exceeds the client count"));
        }
        if !(p.alpha > 0.0 && p.alpha.is_finite()) {
            return Err(Error::config("population.alpha", "must be positive"));
        }
        if p.samples_per_client == 0 || p.test_rows == 0 {
            return Err(Error::config("population.samples_per_client", "need training and test rows"));
        }
        if d.dim == 0 || d.classes < 2 {
            return Err(Error::config("data", "need dim >= 1 and classes >= 2"));
        }
        if !(d.noise >= 0.0 && d.noise.is_finite() && d.separation.is_finite()) {
            return Err(Error::config("data.noise", "must be finite and non-negative"));
        }
        if d.distributions.is_empty() {
            return Err(Error::config("data.distributions", "need at least one distribution"));
        }
        if let Some(bad) = d
            .distributions
            .iter()
            .find(|s| !s.offset.is_empty() && s.offset.len() != d.dim)
        {
            return Err(Error::config(
                "data.distributions.offset",
                format!("length {} does not match dim {}", bad.offset.len(), d.dim),
            ));
        }
        if self.model.hidden.contains(&0) {
            return Err(Error::config("model.hidden", "layer widths must be positive"));
        }
        if !(self.training.lr > 0.0 && self.training.lr.is_finite()) {
            return Err(Error::config("training.lr", "must be positive"));
        }
        self.fixed.validate().map_err(|_| Error::config("fixed", "need 0 < frac_bits and frac_bits + 2 < ring_bits <= 128"))?;
        self.defense.validate(p.public_rows)?;
        self.attack.validate()?;
        if let Some(k) = self.check.k_frac {
            if !(0.0..=1.0).contains(&k) {
                return Err(Error::config("check.k_frac", "must lie in [0, 1]"));
            }
        }
        if !(self.check.lambda > 0.0 && self.check.lambda.is_finite()) {
            return Err(Error::config("check.lambda", "must be positive"));
        }
        if self.defense.kind.is_slvr() {
            let m_c = self.m_c();
            if p.validation_rows == 0 {
                return Err(Error::config("population.validation_rows", "SLVR needs validation data"));
            }
            if p.malicious > m_c {
                return Err(Error::config("check.m_c", "committees cannot hold an honest majority"));
            }
            if CheckCommittee::size(m_c) > p.clients - 1 {
                return Err(Error::config(
                    "check.m_c",
                    format!("committee of {} needs more than {} clients", CheckCommittee::size(m_c), p.clients),
                ));
            }
        }
        let mut last = 0;
        let mut active = p.clients;
        for s in &self.shifts {
            if s.round < last {
                return Err(Error::config("shifts", "rounds must be ascending"));
            }
            last = s.round;
            if s.distribution >= d.distributions.len() {
                return Err(Error::config("shifts.distribution", "unknown distribution id"));
            }
            match s.kind {
                ShiftKind::Evolve if s.count > active - p.malicious => {
                    return Err(Error::config("shifts.count", "more evolving clients than honest clients"));
                }
                ShiftKind::Join => active += s.count,
                _ => {}
            }
        }
        if let Some(sw) = &self.sweep {
            if sw.defenses.is_empty() || sw.attacks.is_empty() || sw.seeds.is_empty() {
                return Err(Error::config("sweep", "every axis needs at least one entry"));
            }
        }
        Ok(())
    }
}

fn span_hint(text: &str, span: Option<std::ops::Range<usize>>) -> String {
    match span {
        Some(r) => {
            let line = text[..r.start.min(text.len())].lines().count().max(1);
            format!(" (line {line})")
        }
        None => String::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
rounds = 2
[population]
clients = 4
[defense]
kind = "fedavg_plain"
"#;

    #[test]
    fn minimal_config_fills_defaults() {
        let c = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(c.population.validation_rows, 10);
        assert_eq!(c.population.alpha, 0.5);
        assert_eq!(c.fixed, FixedParams::default());
        assert_eq!(c.layer_dims(), vec![4, 2]);
        assert_eq!(c.defense.lambda(), 1.5);
    }

    #[test]
    fn canonical_round_trip() {
        let c = ExperimentConfig::from_toml(MINIMAL).unwrap();
        let text = c.to_toml().unwrap();
        let again = ExperimentConfig::from_toml(&text).unwrap();
        assert_eq!(again, c);
        assert_eq!(again.to_toml().unwrap(), text);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = ExperimentConfig::from_toml(&format!("{MINIMAL}bogus = 1\n")).unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
        let err = ExperimentConfig::from_toml(&MINIMAL.replace("clients = 4", "clients = 4\nclientz = 3")).unwrap_err();
        assert!(err.to_string().contains("clientz"), "{err}");
    }

    #[test]
    fn invalid_values_name_their_field() {
        let slvr = MINIMAL.replace("fedavg_plain", "slvr_acc").replace("clients = 4", "clients = 4\nmalicious = 2");
        let err = ExperimentConfig::from_toml(&slvr).unwrap_err();
        assert!(err.to_string().contains("check.m_c"), "{err}");
        let err = ExperimentConfig::from_toml(&MINIMAL.replace("clients = 4", "clients = 4\nalpha = -1.0")).unwrap_err();
        assert!(err.to_string().contains("population.alpha"), "{err}");
    }

    #[test]
    fn shifts_and_sweep_parse() {
        let text = format!(
            "{MINIMAL}\n[[shifts]]\nround = 1\nkind = \"join\"\ncount = 2\ndistribution = 0\n\n[sweep]\ndefenses = [\"norm_ball\"]\nattacks = [\"sign_flip\"]\nseeds = [1, 2]\n"
        );
        let c = ExperimentConfig::from_toml(&text).unwrap();
        assert_eq!(c.max_clients(), 6);
        assert_eq!(ExperimentConfig::from_toml(&c.to_toml().unwrap()).unwrap(), c);
    }
}
