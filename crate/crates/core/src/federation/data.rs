use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Gamma, Normal};

use super::config::DataConfig;
use crate::error::{Error, Result};
use crate::numerics::Dataset;

/// `n` rows from distribution `dist`: class `c` centred at `separation`
/// on coordinate `(axis + c) mod dim`, shifted by the distribution offset,
/// with isotropic Gaussian noise. Labels are uniform.
pub fn gen_synthetic<R: Rng + ?Sized>(cfg: &DataConfig, dist: usize, n: usize, rng: &mut R) -> Result<Dataset> {
    let spec = cfg
        .distributions
        .get(dist)
        .ok_or_else(|| Error::config("data.distributions", format!("no distribution {dist}")))?;
    let noise = Normal::new(0.0, cfg.noise).map_err(|e| Error::config("data.noise", e.to_string()))?;
    let mut features = Vec::with_capacity(n * cfg.dim);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let y = rng.random_range(0..cfg.classes);
        let hot = (spec.axis + y) % cfg.dim;
        for k in 0..cfg.dim {
            let mean = if k == hot { cfg.separation } else { 0.0 } + spec.offset.get(k).copied().unwrap_or(0.0);
            features.push(mean + noise.sample(rng));
        }
        labels.push(y);
    }
    Dataset::new(features, cfg.dim, labels, cfg.classes)
}

fn dirichlet<R: Rng + ?Sized>(alpha: f64, m: usize, rng: &mut R) -> Result<Vec<f64>> {
    let g = Gamma::new(alpha, 1.0).map_err(|e| Error::config("population.alpha", e.to_string()))?;
    let draws: Vec<f64> = (0..m).map(|_| g.sample(rng)).collect();
    let total: f64 = draws.iter().sum();
    if total > 0.0 {
        Ok(draws.into_iter().map(|x| x / total).collect())
    } else {
        Ok(vec![1.0 / m as f64; m])
    }
}

/// Split `d` over `m` clients: each class is divided according to its own
/// `Dir(alpha)` draw. Draws that leave a client empty are redrawn.
pub fn dirichlet_partition<R: Rng + ?Sized>(d: &Dataset, m: usize, alpha: f64, rng: &mut R) -> Result<Vec<Dataset>> {
    if m == 0 || d.len() < m {
        return Err(Error::PopulationTooSmall {
            clients: d.len(),
            committee: m,
        });
    }
    if !(alpha > 0.0) {
        return Err(Error::config("population.alpha", "must be positive"));
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); d.classes];
    for (i, &y) in d.labels.iter().enumerate() {
        by_class[y].push(i);
    }
    for _ in 0..1000 {
        let mut parts: Vec<Vec<usize>> = vec![Vec::new(); m];
        for idx in &by_class {
            let mut idx = idx.clone();
            idx.shuffle(rng);
            let p = dirichlet(alpha, m, rng)?;
            let mut cum = 0.0;
            let mut start = 0;
            for (client, share) in p.iter().enumerate() {
                cum += share;
                let end = if client + 1 == m {
                    idx.len()
                } else {
                    ((cum * idx.len() as f64).round() as usize).clamp(start, idx.len())
                };
                parts[client].extend_from_slice(&idx[start..end]);
                start = end;
            }
        }
        if parts.iter().all(|p| !p.is_empty()) {
            return Ok(parts
                .into_iter()
                .map(|mut p| {
                    p.sort_unstable();
                    d.subset(&p)
                })
                .collect());
        }
    }
    Err(Error::config("population.alpha", "could not draw a partition without empty clients"))
}
