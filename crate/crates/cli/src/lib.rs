//! Subcommands behind the `fedcheck` binary.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use fedcheck::federation::{run_experiment, write_metrics_csv, ExperimentConfig, RunOptions};
use fedcheck::secure_check::write_debug_csv;
use rayon::prelude::*;

/// Read and validate a config, optionally replacing its master seed.
pub fn load_config(path: &Path, seed: Option<u64>) -> Result<ExperimentConfig> {
    if !path.is_file() {
        bail!("config not found: {}", path.display());
    }
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut cfg = ExperimentConfig::from_toml(&text)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn create(out_dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>)> {
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let path = out_dir.join(name);
    let file = File::create(&path).with_context(|| format!("writing {}", path.display()))?;
    Ok((path, BufWriter::new(file)))
}

/// Run one experiment; writes `metrics.csv` and, on request,
/// `debug_scores.csv`. Returns the metrics path.
pub fn cmd_run(config: &Path, out_dir: &Path, seed: Option<u64>, debug_scores: bool) -> Result<PathBuf> {
    let cfg = load_config(config, seed)?;
    let result = run_experiment(&cfg, RunOptions { debug_scores })?;
    let (path, mut w) = create(out_dir, "metrics.csv")?;
    write_metrics_csv(&mut w, &result.metrics)?;
    w.flush()?;
    if debug_scores {
        let (_, mut d) = create(out_dir, "debug_scores.csv")?;
        write_debug_csv(&mut d, &result.debug)?;
        d.flush()?;
    }
    Ok(path)
}

/// Final accuracy of every (defense, attack) cell, averaged over seeds.
pub struct SweepTable {
    pub defenses: Vec<String>,
    pub attacks: Vec<String>,
    pub cells: Vec<Vec<f64>>,
}

impl SweepTable {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["defense".to_string()];
        header.extend(self.attacks.iter().cloned());
        header.push("min".into());
        w.write_record(&header)?;
        for (d, row) in self.defenses.iter().zip(&self.cells) {
            let min = row.iter().copied().fold(f64::INFINITY, f64::min);
            let mut rec = vec![d.clone()];
            rec.extend(row.iter().map(|a| format!("{a:.4}")));
            rec.push(format!("{min:.4}"));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn sweep(cfg: &ExperimentConfig) -> Result<SweepTable> {
    let grid = cfg.sweep.as_ref().ok_or_else(|| anyhow!("invalid configuration: sweep: missing [sweep] table"))?;
    let seeds = if grid.seeds.is_empty() { vec![cfg.seed] } else { grid.seeds.clone() };
    let mut jobs = Vec::new();
    for &d in &grid.defenses {
        for &a in &grid.attacks {
            for &s in &seeds {
                jobs.push((d, a, s));
            }
        }
    }
    let finals = jobs
        .par_iter()
        .map(|&(d, a, s)| {
            let mut c = cfg.clone();
            c.defense.kind = d;
            c.attack.kind = a;
            c.seed = s;
            c.validate()?;
            Ok(run_experiment(&c, RunOptions::default())?.final_accuracy())
        })
        .collect::<Result<Vec<f64>>>()?;
    let per_cell = seeds.len();
    let cells = finals
        .chunks(per_cell * grid.attacks.len())
        .map(|row| row.chunks(per_cell).map(|c| c.iter().sum::<f64>() / per_cell as f64).collect())
        .collect();
    Ok(SweepTable {
        defenses: grid.defenses.iter().map(|d| d.to_string()).collect(),
        attacks: grid.attacks.iter().map(|a| a.to_string()).collect(),
        cells,
    })
}

/// Defense by attack grid of final accuracies; writes `sweep.csv`.
/// `--seed` replaces the seed list with that single seed.
pub fn cmd_sweep(config: &Path, out_dir: &Path, seed: Option<u64>) -> Result<PathBuf> {
    let mut cfg = load_config(config, seed)?;
    if let (Some(s), Some(grid)) = (seed, cfg.sweep.as_mut()) {
        grid.seeds = vec![s];
    }
    let table = sweep(&cfg)?;
    let (path, mut w) = create(out_dir, "sweep.csv")?;
    table.write_csv(&mut w)?;
    w.flush()?;
    Ok(path)
}

/// Communication ledger of the configured experiment; writes `ledger.csv`.
pub fn cmd_bench(config: &Path, out_dir: &Path, seed: Option<u64>) -> Result<PathBuf> {
    let cfg = load_config(config, seed)?;
    if !cfg.defense.kind.is_slvr() {
        bail!("invalid configuration: defense.kind: bench needs slvr_acc or slvr_prob");
    }
    let result = run_experiment(&cfg, RunOptions::default())?;
    let (path, mut w) = create(out_dir, "ledger.csv")?;
    result.ledger.write_csv(&mut w)?;
    w.flush()?;
    Ok(path)
}
