#![allow(dead_code)]

use fedcheck::numerics::{Dataset, FixedParams, FixedVec, MlpModel};
use fedcheck::secure_check::{
    plaintext_oracle, run_check, sample_committees, secure_aggregate, share_overrides, Aggregate,
    CheckCommittee, CheckOutcome, CheckParams, OracleRound, ScoreOverrides, SharedRound,
};
use fedcheck::sharing::{Mpc, ShareVec, SharedDataset};
use rand::Rng;
use rand_distr::{Distribution, Normal};

/// A small round in the clear: updates, validation sets and the global model.
pub struct PlainRound {
    pub dims: Vec<usize>,
    pub global: MlpModel,
    pub updates: Vec<Vec<f64>>,
    pub validation: Vec<Dataset>,
}

pub fn gaussian_dataset<R: Rng>(rows: usize, dim: usize, classes: usize, rng: &mut R) -> Dataset {
    let noise = Normal::new(0.0, 1.0).unwrap();
    let mut features = Vec::with_capacity(rows * dim);
    let mut labels = Vec::with_capacity(rows);
    for _ in 0..rows {
        let y = rng.random_range(0..classes);
        for k in 0..dim {
            let centre = if k % classes == y { 1.5 } else { -0.5 };
            features.push(centre + noise.sample(rng));
        }
        labels.push(y);
    }
    Dataset::new(features, dim, labels, classes).unwrap()
}

pub fn random_round<R: Rng>(m: usize, rows: usize, dims: &[usize], rng: &mut R) -> PlainRound {
    let global = MlpModel::random(dims, rng);
    let n = global.params.len();
    let updates = (0..m)
        .map(|_| {
            let scale = if rng.random_bool(0.2) { 3.0 } else { 0.3 };
            let noise = Normal::new(0.0, scale).unwrap();
            (0..n).map(|_| noise.sample(rng)).collect()
        })
        .collect();
    let validation = (0..m)
        .map(|_| gaussian_dataset(rows, dims[0], *dims.last().unwrap(), rng))
        .collect();
    PlainRound {
        dims: dims.to_vec(),
        global,
        updates,
        validation,
    }
}

pub struct Executed {
    pub committee: CheckCommittee,
    pub secure: CheckOutcome,
    pub aggregate: Aggregate,
    pub oracle: CheckOutcome,
    pub oracle_mean: Option<Vec<f64>>,
    pub reveals: Vec<String>,
    pub mpc: Mpc,
}

/// Run the shared pipeline and the oracle on the same round.
pub fn execute<R: Rng>(
    round: &PlainRound,
    params: &CheckParams,
    overrides: &ScoreOverrides,
    seed: u64,
    rng: &mut R,
) -> Executed {
    let fp = FixedParams::default();
    let mut mpc = Mpc::setup(fp, seed);
    let m = round.updates.len();
    let committee = sample_committees(&mut mpc, m, params.m_c).unwrap();
    let encoded: Vec<FixedVec> = round
        .updates
        .iter()
        .map(|u| FixedVec::from_reals(u, fp).unwrap())
        .collect();
    let shared: Vec<ShareVec> = encoded.iter().map(|u| mpc.share(u, rng)).collect();
    let validation: Vec<SharedDataset> = round
        .validation
        .iter()
        .map(|d| mpc.share_dataset(d, rng).unwrap())
        .collect();
    let global = round.global.to_fixed(fp).unwrap();
    let shared_overrides = share_overrides(&mut mpc, overrides, rng).unwrap();
    let outcome = run_check(
        &mut mpc,
        &SharedRound {
            updates: &shared,
            validation: &validation,
            global: &global,
            committee: &committee,
            overrides: &shared_overrides,
        },
        params,
    )
    .unwrap();
    let secure = outcome.peek(&mpc).unwrap();
    let aggregate = secure_aggregate(&mut mpc, &shared, &outcome.accept_bits).unwrap();
    let reveals = mpc.reveals().to_vec();
    let (oracle, oracle_mean) = plaintext_oracle(
        &OracleRound {
            updates: &encoded,
            validation: &round.validation,
            global: &global,
            committee: &committee,
            overrides,
        },
        params,
        fp,
    )
    .unwrap();
    Executed {
        committee,
        secure,
        aggregate,
        oracle,
        oracle_mean,
        reveals,
        mpc,
    }
}
