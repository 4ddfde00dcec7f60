use fedcheck::defenses::DefenseKind;
use fedcheck::federation::{
    apply_shift, run_experiment, Client, Experiment, ExperimentConfig, Population, RunOptions, ShiftEvent, ShiftKind,
};
use fedcheck::numerics::{accuracy, Dataset, MlpModel};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn config(extra: &str) -> ExperimentConfig {
    ExperimentConfig::from_toml(&format!(
        r#"
seed = 5
rounds = 50
[population]
clients = 10
[data]
distributions = [{{ axis = 0 }}, {{ axis = 2, offset = [3.0, 3.0, 3.0, 3.0] }}]
[defense]
kind = "fedavg_plain"
{extra}
"#
    ))
    .unwrap()
}

#[test]
fn fedavg_learns_separable_mixture() {
    let r = run_experiment(&config(""), RunOptions::default()).unwrap();
    assert_eq!(r.metrics.len(), 50);
    assert!(r.final_accuracy() >= 0.9, "{}", r.final_accuracy());
    assert!(r.metrics.iter().all(|m| m.accepted_count == 10 && m.bytes_total == 0));
}

#[test]
fn runs_are_deterministic_and_seed_sensitive() {
    let mut cfg = config("");
    cfg.rounds = 5;
    cfg.defense.kind = DefenseKind::SlvrAcc;
    cfg.population.malicious = 1;
    let a = run_experiment(&cfg, RunOptions::default()).unwrap();
    let b = run_experiment(&cfg, RunOptions::default()).unwrap();
    assert_eq!(a.metrics, b.metrics);
    assert_eq!(a.final_model, b.final_model);
    cfg.seed = 6;
    let c = run_experiment(&cfg, RunOptions::default()).unwrap();
    assert_ne!(a.metrics, c.metrics);
}

#[test]
fn secure_rounds_keep_top_k_and_count_bytes() {
    let mut cfg = config("");
    cfg.rounds = 4;
    cfg.population.malicious = 1;
    cfg.defense.kind = DefenseKind::SlvrProb;
    let r = run_experiment(&cfg, RunOptions { debug_scores: true }).unwrap();
    for w in r.metrics.windows(2) {
        assert!(w[1].bytes_total > w[0].bytes_total);
        assert_eq!(w[1].bytes_total, w[0].bytes_total + w[1].bytes_round);
    }
    // keep = round((1 - 1/10) * 10) = 9
    assert!(r.metrics.iter().all(|m| m.accepted_count <= 9));
    assert_eq!(r.debug.len(), 4);
    assert!(r.ledger.bytes_with_prefix("cross_check/") > 0);
}

#[test]
fn join_grows_population_and_test_set() {
    let mut cfg = config("");
    cfg.population.clients = 100;
    cfg.population.samples_per_client = 10;
    cfg.rounds = 2;
    cfg.shifts = vec![ShiftEvent {
        round: 1,
        kind: ShiftKind::Join,
        count: 20,
        distribution: 1,
    }];
    let mut exp = Experiment::new(&cfg).unwrap();
    let before = exp.test_set().len();
    let m0 = exp.run_round().unwrap();
    let m1 = exp.run_round().unwrap();
    assert_eq!(m0.accept_bits.len(), 100);
    assert_eq!(m1.accept_bits.len(), 120);
    assert_eq!(m1.client_distribution.iter().filter(|&&d| d == 1).count(), 20);
    assert_eq!(exp.test_set().len(), 2 * before);
}

#[test]
fn evolve_of_zero_clients_is_identity() {
    let cfg = config("");
    let d = Dataset::new(vec![1.0, 2.0, 3.0, 4.0], 4, vec![1], 2).unwrap();
    let clients = (0..3)
        .map(|i| Client {
            data: d.clone(),
            honest: i != 1,
            distribution: 0,
        })
        .collect();
    let mut pop = Population { clients };
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let event = ShiftEvent {
        round: 0,
        kind: ShiftKind::Evolve,
        count: 0,
        distribution: 1,
    };
    apply_shift(&mut pop, &event, &cfg, &mut rng).unwrap();
    assert_eq!(pop.len(), 3);
    assert!(pop.clients.iter().all(|c| c.data == d && c.distribution == 0));
    assert_eq!(pop.malicious(), vec![false, true, false]);
}

#[test]
fn evolve_moves_honest_clients_only() {
    let mut cfg = config("");
    cfg.population.malicious = 3;
    cfg.rounds = 1;
    cfg.shifts = vec![ShiftEvent {
        round: 0,
        kind: ShiftKind::Evolve,
        count: 7,
        distribution: 1,
    }];
    let mut exp = Experiment::new(&cfg).unwrap();
    let m = exp.run_round().unwrap();
    for (d, bad) in m.client_distribution.iter().zip(&m.malicious) {
        assert!(!(*bad && *d == 1));
    }
    assert_eq!(m.client_distribution.iter().filter(|&&d| d == 1).count(), 7);
    cfg.shifts[0].count = 8;
    assert!(Experiment::new(&cfg).is_err());
}

#[test]
fn accuracy_matches_loop_oracle() {
    // a constant predictor scores the share of its class
    let labels = vec![0, 1, 1, 0, 1];
    let d = Dataset::new(vec![0.0; 10], 2, labels.clone(), 2).unwrap();
    let mut bias_one = MlpModel::zeros(&[2, 2]);
    let n = bias_one.params.len();
    bias_one.params[n - 1] = 1.0;
    assert_eq!(accuracy(&bias_one, &d).unwrap(), 0.6);

    let model = MlpModel::from_params(&[2, 2], vec![1.0, -1.0, -1.0, 1.0, 0.0, 0.0]).unwrap();
    let features = vec![2.0, 0.0, 0.0, 2.0, 1.0, 3.0, -1.0, -2.0];
    let d = Dataset::new(features.clone(), 2, vec![0, 1, 0, 0], 2).unwrap();
    let mut correct = 0;
    for (row, &y) in features.chunks(2).zip(&d.labels) {
        let logits = [row[0] - row[1], row[1] - row[0]];
        let pred = if logits[1] > logits[0] { 1 } else { 0 };
        correct += (pred == y) as usize;
    }
    assert_eq!(accuracy(&model, &d).unwrap(), correct as f64 / 4.0);
}
