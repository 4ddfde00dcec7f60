use std::collections::BTreeSet;
use std::io::Write;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use super::config::{ExperimentConfig, ShiftEvent, ShiftKind};
use super::data::{dirichlet_partition, gen_synthetic};
use crate::attacks::{
    adaptive_cosine, adaptive_normball, adaptive_normbound, adaptive_slvr, additive_noise,
    extreme_overrides, label_flip, sign_flip, AdversaryView, AttackKind,
};
use crate::defenses::{
    cosine_sim, cosine_threshold, masked_mean, norm_ball, norm_bound_adaptive,
    norm_bound_public, DefenseKind,
};
use crate::error::{Error, Result};
use crate::numerics::{accuracy, local_update, Dataset, FixedVec, MlpModel};
use crate::secure_check::plain::{l2_norm, median};
use crate::secure_check::{
    run_check, sample_committees, secure_aggregate, share_overrides, CheckCommittee, CheckParams,
    DebugRecord, ScoreOverrides, SharedRound,
};
use crate::sharing::{substream_seed, CommLedger, Mpc, ShareVec};

#[derive(Clone, Debug, PartialEq)]
pub struct Client {
    pub data: Dataset,
    pub honest: bool,
    pub distribution: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Population {
    pub clients: Vec<Client>,
}

impl Population {
    pub fn len(&self) -> usize {
        self.clients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clients.is_empty()
    }

    pub fn malicious(&self) -> Vec<bool> {
        self.clients.iter().map(|c| !c.honest).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoundMetrics {
    pub round: usize,
    /// Global model accuracy on the test set after this round.
    pub accuracy: f64,
    pub accept_bits: Vec<bool>,
    pub accepted_count: usize,
    pub attack: AttackKind,
    pub defense: DefenseKind,
    pub bytes_round: u64,
    pub bytes_total: u64,
    /// Distribution held by each client during the round.
    pub client_distribution: Vec<usize>,
    pub malicious: Vec<bool>,
}

impl RoundMetrics {
    pub fn accept_string(&self) -> String {
        self.accept_bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub metrics: Vec<RoundMetrics>,
    pub ledger: CommLedger,
    pub final_model: MlpModel,
    pub debug: Vec<DebugRecord>,
}

impl ExperimentResult {
    pub fn final_accuracy(&self) -> f64 {
        self.metrics.last().map_or(0.0, |m| m.accuracy)
    }
}

/// Switch clients to a new distribution, or add clients holding it.
pub fn apply_shift(
    population: &mut Population,
    event: &ShiftEvent,
    cfg: &ExperimentConfig,
    rng: &mut ChaCha20Rng,
) -> Result<()> {
    let rows = cfg.population.samples_per_client;
    match event.kind {
        ShiftKind::Evolve => {
            let honest: Vec<usize> = (0..population.len()).filter(|&i| population.clients[i].honest).collect();
            if event.count > honest.len() {
                return Err(Error::config("shifts.count", "more evolving clients than honest clients"));
            }
            for k in index::sample(rng, honest.len(), event.count) {
                let c = &mut population.clients[honest[k]];
                c.data = gen_synthetic(&cfg.data, event.distribution, rows, rng)?;
                c.distribution = event.distribution;
            }
        }
        ShiftKind::Join => {
            for _ in 0..event.count {
                population.clients.push(Client {
                    data: gen_synthetic(&cfg.data, event.distribution, rows, rng)?,
                    honest: cfg.population.joiners_honest,
                    distribution: event.distribution,
                });
            }
        }
    }
    Ok(())
}

/// One experiment in progress.
pub struct Experiment {
    cfg: ExperimentConfig,
    dims: Vec<usize>,
    round: usize,
    pub global: MlpModel,
    pub population: Population,
    public: Dataset,
    test: Dataset,
    distributions: BTreeSet<usize>,
    mpc: Mpc,
    committee: Option<CheckCommittee>,
    prev_norms: Option<Vec<f64>>,
    prev_global_update: Vec<f64>,
    frozen_validation: Vec<Option<Dataset>>,
    pub ledger: CommLedger,
    debug: Option<Vec<DebugRecord>>,
}

impl Experiment {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let seed = cfg.seed;
        let p = &cfg.population;
        let mut data_rng = rng_for(seed, "data");
        let pool = gen_synthetic(&cfg.data, 0, p.samples_per_client * p.clients, &mut data_rng)?;
        let parts = dirichlet_partition(&pool, p.clients, p.alpha, &mut data_rng)?;
        let public = gen_synthetic(&cfg.data, 0, p.public_rows, &mut data_rng)?;
        let mut pop_rng = rng_for(seed, "population");
        let bad: BTreeSet<usize> = index::sample(&mut pop_rng, p.clients, p.malicious).into_iter().collect();
        let clients = parts
            .into_iter()
            .enumerate()
            .map(|(i, data)| Client {
                data,
                honest: !bad.contains(&i),
                distribution: 0,
            })
            .collect();
        let dims = cfg.layer_dims();
        let mut mpc = Mpc::setup(cfg.fixed, substream_seed(seed, "mpc"));
        mpc.mult_mode = cfg.check.mult_mode;
        mpc.inference = cfg.check.inference;
        let mut exp = Experiment {
            cfg: cfg.clone(),
            round: 0,
            global: MlpModel::zeros(&dims),
            prev_global_update: vec![0.0; crate::numerics::param_count(&dims)],
            dims,
            population: Population { clients },
            public,
            test: Dataset::empty(cfg.data.dim, cfg.data.classes),
            distributions: BTreeSet::from([0]),
            mpc,
            committee: None,
            prev_norms: None,
            frozen_validation: vec![None; p.clients],
            ledger: CommLedger::default(),
            debug: None,
        };
        exp.rebuild_test()?;
        Ok(exp)
    }

    /// Keep the check outcome of every secure round.
    pub fn record_debug(&mut self) {
        self.debug.get_or_insert_with(Vec::new);
    }

    fn rebuild_test(&mut self) -> Result<()> {
        let parts = self
            .distributions
            .iter()
            .map(|&d| {
                let mut rng = rng_for(self.cfg.seed, &format!("test/{d}"));
                gen_synthetic(&self.cfg.data, d, self.cfg.population.test_rows, &mut rng)
            })
            .collect::<Result<Vec<_>>>()?;
        self.test = Dataset::concat(&parts)?;
        Ok(())
    }

    pub fn test_set(&self) -> &Dataset {
        &self.test
    }

    pub fn global(&self) -> &MlpModel {
        &self.global
    }

    fn apply_shifts(&mut self) -> Result<()> {
        let events: Vec<(usize, ShiftEvent)> = self
            .cfg
            .shifts
            .iter()
            .copied()
            .enumerate()
            .filter(|(_, e)| e.round == self.round)
            .collect();
        for (k, e) in events {
            let before = self.population.len();
            let before_dist: Vec<usize> = self.population.clients.iter().map(|c| c.distribution).collect();
            let mut rng = rng_for(self.cfg.seed, &format!("shift/{k}"));
            apply_shift(&mut self.population, &e, &self.cfg, &mut rng)?;
            self.distributions.insert(e.distribution);
            self.frozen_validation.resize(self.population.len(), None);
            for (i, d) in before_dist.iter().enumerate() {
                if self.population.clients[i].distribution != *d {
                    self.frozen_validation[i] = None;
                }
            }
            if self.population.len() != before {
                self.committee = None;
            }
            self.rebuild_test()?;
        }
        Ok(())
    }

    fn train(&self, data: &Dataset, label: &str) -> Result<Vec<f64>> {
        let mut rng = rng_for(self.cfg.seed, &format!("train/{}/{label}", self.round));
        local_update(&self.global, data, &self.cfg.training, &mut rng)
    }

    /// Updates every client submits, plus the malicious clients' clean ones.
    fn client_updates(&self, u_pubval: Option<&[f64]>) -> Result<Vec<Vec<f64>>> {
        let clients = &self.population.clients;
        let clean = clients
            .iter()
            .enumerate()
            .map(|(i, c)| self.train(&c.data, &i.to_string()))
            .collect::<Result<Vec<_>>>()?;
        let bad: Vec<usize> = (0..clients.len()).filter(|&i| !clients[i].honest).collect();
        let attack = self.cfg.attack;
        if bad.is_empty() || attack.kind == AttackKind::None {
            return Ok(clean);
        }
        let mut out = clean.clone();
        match attack.kind {
            AttackKind::None => {}
            AttackKind::AdditiveNoise => {
                for &i in &bad {
                    let mut rng = rng_for(self.cfg.seed, &format!("attack/{}/{i}", self.round));
                    out[i] = additive_noise(&clean[i], attack.sigma, &mut rng)?;
                }
            }
            AttackKind::SignFlip => {
                for &i in &bad {
                    out[i] = sign_flip(&clean[i]);
                }
            }
            AttackKind::LabelFlip => {
                for &i in &bad {
                    out[i] = self.train(&label_flip(&clients[i].data), &i.to_string())?;
                }
            }
            AttackKind::Adaptive => {
                let view = AdversaryView {
                    clean_data: Dataset::concat(bad.iter().map(|&i| &clients[i].data))?,
                    clean_updates: bad.iter().map(|&i| clean[i].clone()).collect(),
                    global: self.global.clone(),
                    defense: self.cfg.defense.kind,
                };
                let poisoned = self.adaptive(&view, u_pubval)?;
                for &i in &bad {
                    out[i] = poisoned.clone();
                }
            }
        }
        Ok(out)
    }

    fn adaptive(&self, view: &AdversaryView, u_pubval: Option<&[f64]>) -> Result<Vec<f64>> {
        let grid = self.cfg.attack.grid.values()?;
        let lambda = self.cfg.defense.lambda();
        let pubval = || u_pubval.ok_or_else(|| Error::config("data.public_rows", "missing public update"));
        Ok(match view.defense {
            DefenseKind::NormBoundAdaptive => {
                // the broadcast bound, or the adversary's own estimate in the first round
                let tau = match &self.prev_norms {
                    Some(prev) => lambda * median(prev)?,
                    None => {
                        let own: Vec<f64> = view.clean_updates.iter().map(|u| l2_norm(u)).collect();
                        lambda * median(&own)?
                    }
                };
                adaptive_normbound(view, tau)?
            }
            DefenseKind::NormBoundPublic => adaptive_normbound(view, l2_norm(pubval()?))?,
            DefenseKind::NormBall => {
                let p = pubval()?;
                adaptive_normball(view, p, lambda * l2_norm(p))?
            }
            DefenseKind::CosineSim => {
                let tau = cosine_threshold(&self.prev_global_update, pubval()?, lambda);
                adaptive_cosine(view, &self.prev_global_update, tau, &grid)?.update
            }
            DefenseKind::SlvrAcc | DefenseKind::SlvrProb => adaptive_slvr(view, &grid)?.update,
            DefenseKind::FedavgPlain => {
                let top = grid.iter().copied().fold(f64::MIN, f64::max);
                let s = crate::attacks::estimate_direction(view)?;
                view.mean_update()?.iter().zip(&s).map(|(b, x)| b - top * x).collect()
            }
        })
    }

    fn validation_sets(&mut self) -> Vec<Dataset> {
        let rows = self.cfg.population.validation_rows;
        let freeze = self.cfg.check.freeze_validation;
        let round = self.round;
        let seed = self.cfg.seed;
        (0..self.population.len())
            .map(|i| {
                if freeze {
                    if let Some(d) = &self.frozen_validation[i] {
                        return d.clone();
                    }
                }
                let data = &self.population.clients[i].data;
                let mut rng = rng_for(seed, &format!("validation/{round}/{i}"));
                let mut pick = index::sample(&mut rng, data.len(), rows.min(data.len())).into_vec();
                pick.sort_unstable();
                let d = data.subset(&pick);
                if freeze {
                    self.frozen_validation[i] = Some(d.clone());
                }
                d
            })
            .collect()
    }

    fn secure_round(&mut self, updates: &[Vec<f64>]) -> Result<(Vec<bool>, Option<Vec<f64>>)> {
        let m = updates.len();
        let m_c = self.cfg.m_c();
        if self.committee.is_none() || self.cfg.check.resample_committees {
            self.committee = Some(sample_committees(&mut self.mpc, m, m_c)?);
        }
        let committee = self.committee.clone().expect("sampled above");
        let fp = self.cfg.fixed;
        let validation = self.validation_sets();
        let mut rng = rng_for(self.cfg.seed, &format!("share/{}", self.round));
        let mpc = &mut self.mpc;
        let shared: Vec<ShareVec> = updates
            .iter()
            .map(|u| Ok(mpc.share(&FixedVec::from_reals(u, fp)?, &mut rng)))
            .collect::<Result<_>>()?;
        let shared_val = validation
            .iter()
            .map(|d| mpc.share_dataset(d, &mut rng))
            .collect::<Result<Vec<_>>>()?;
        let variant = self.cfg.variant();
        let overrides = if self.cfg.attack.extreme_manipulation {
            extreme_overrides(&committee, &self.population.malicious(), variant, self.cfg.data.classes)
        } else {
            ScoreOverrides::new()
        };
        let shared_overrides = share_overrides(mpc, &overrides, &mut rng)?;
        let global = self.global.to_fixed(fp)?;
        let mut params = CheckParams::new(m_c, variant, &self.dims);
        params.k_frac = self.cfg.check.k_frac;
        params.lambda = self.cfg.check.lambda;
        params.norm_check = self.cfg.check.norm_check;
        let outcome = run_check(
            mpc,
            &SharedRound {
                updates: &shared,
                validation: &shared_val,
                global: &global,
                committee: &committee,
                overrides: &shared_overrides,
            },
            &params,
        )?;
        let aggregate = secure_aggregate(mpc, &shared, &outcome.accept_bits)?;
        // simulation metadata only; the protocol revealed just the aggregate and count
        let clear = outcome.peek(mpc)?;
        let bits = clear.accept_bits.clone();
        if let Some(debug) = &mut self.debug {
            debug.push(DebugRecord {
                round: self.round,
                committees: committee.members.clone(),
                outcome: clear,
            });
        }
        Ok((bits, aggregate.mean()))
    }

    fn plain_round(&mut self, updates: &[Vec<f64>], u_pubval: Option<&[f64]>) -> Result<(Vec<bool>, Option<Vec<f64>>)> {
        let lambda = self.cfg.defense.lambda();
        let pubval = || u_pubval.ok_or_else(|| Error::config("data.public_rows", "missing public update"));
        let bits = match self.cfg.defense.kind {
            DefenseKind::NormBoundAdaptive => norm_bound_adaptive(updates, self.prev_norms.as_deref(), lambda)?,
            DefenseKind::NormBoundPublic => norm_bound_public(updates, pubval()?),
            DefenseKind::NormBall => norm_ball(updates, pubval()?, lambda),
            DefenseKind::CosineSim => cosine_sim(updates, &self.prev_global_update, pubval()?, lambda),
            _ => vec![true; updates.len()],
        };
        let mean = masked_mean(updates, &bits);
        Ok((bits, mean))
    }

    /// Run one round and return its metrics.
    pub fn run_round(&mut self) -> Result<RoundMetrics> {
        self.apply_shifts()?;
        let kind = self.cfg.defense.kind;
        let u_pubval = if kind.uses_public_data() {
            Some(self.train(&self.public, "public")?)
        } else {
            None
        };
        let updates = self.client_updates(u_pubval.as_deref())?;
        let (bits, mean) = if kind.is_slvr() {
            self.secure_round(&updates)?
        } else {
            self.plain_round(&updates, u_pubval.as_deref())?
        };
        self.prev_norms = Some(updates.iter().map(|u| l2_norm(u)).collect());
        match &mean {
            Some(delta) => {
                self.global = self.global.with_update(delta)?;
                self.prev_global_update = delta.clone();
            }
            None => self.prev_global_update.iter_mut().for_each(|x| *x = 0.0),
        }
        let round_ledger = self.mpc.take_ledger();
        self.ledger.merge(&round_ledger);
        let metrics = RoundMetrics {
            round: self.round,
            accuracy: accuracy(&self.global, &self.test)?,
            accepted_count: bits.iter().filter(|&&b| b).count(),
            accept_bits: bits,
            attack: self.cfg.attack.kind,
            defense: kind,
            bytes_round: round_ledger.total_bytes(),
            bytes_total: self.ledger.total_bytes(),
            client_distribution: self.population.clients.iter().map(|c| c.distribution).collect(),
            malicious: self.population.malicious(),
        };
        self.round += 1;
        Ok(metrics)
    }

    pub fn finish(self, metrics: Vec<RoundMetrics>) -> ExperimentResult {
        ExperimentResult {
            metrics,
            ledger: self.ledger,
            final_model: self.global,
            debug: self.debug.unwrap_or_default(),
        }
    }
}

fn rng_for(seed: u64, label: &str) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(substream_seed(seed, label))
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    pub debug_scores: bool,
}

/// Run every round of the configured experiment.
pub fn run_experiment(cfg: &ExperimentConfig, opts: RunOptions) -> Result<ExperimentResult> {
    let mut exp = Experiment::new(cfg)?;
    if opts.debug_scores {
        exp.record_debug();
    }
    let metrics = (0..cfg.rounds).map(|_| exp.run_round()).collect::<Result<Vec<_>>>()?;
    Ok(exp.finish(metrics))
}

pub fn write_metrics_csv<W: Write>(out: W, metrics: &[RoundMetrics]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "round",
        "accuracy",
        "accepted_count",
        "accepted_bits",
        "attack",
        "defense",
        "bytes_total",
    ])?;
    for m in metrics {
        w.write_record([
            m.round.to_string(),
            m.accuracy.to_string(),
            m.accepted_count.to_string(),
            m.accept_string(),
            m.attack.to_string(),
            m.defense.to_string(),
            m.bytes_total.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
