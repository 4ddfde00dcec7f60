//! Plaintext statistics shared by the oracle, the baselines and the attacks.

use crate::error::{Error, Result};

/// Number of entries kept after trimming a committee list of `2*m_c + 1`.
pub fn kept(m_c: usize) -> usize {
    2 * m_c + 1 - 2 * (m_c / 2)
}

/// Sort ascending, drop `m_c / 2` entries from each end, average the rest.
pub fn trimmed_mean(scores: &[f64], m_c: usize) -> Result<f64> {
    if scores.len() != 2 * m_c + 1 {
        return Err(Error::WrongLength {
            expected: 2 * m_c + 1,
            actual: scores.len(),
        });
    }
    let mut s = scores.to_vec();
    s.sort_by(f64::total_cmp);
    let t = m_c / 2;
    let mid = &s[t..s.len() - t];
    Ok(mid.iter().sum::<f64>() / mid.len() as f64)
}

/// Median; the mean of the two central values for even lengths.
pub fn median(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut s = values.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    Ok(if n % 2 == 1 {
        s[n / 2]
    } else {
        (s[n / 2 - 1] + s[n / 2]) / 2.0
    })
}

/// Indicator of the `k` largest scores; ties favour the lower index.
pub fn top_k<T: PartialOrd + Copy>(scores: &[T], k: usize) -> Vec<bool> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut bits = vec![false; scores.len()];
    for &i in order.iter().take(k) {
        bits[i] = true;
    }
    bits
}

pub fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Descending rank of `i` (0 is best); ties go to the lower index.
pub fn descending_rank(scores: &[f64], i: usize) -> usize {
    scores
        .iter()
        .enumerate()
        .filter(|&(j, &s)| s > scores[i] || (s == scores[i] && j < i))
        .count()
}
