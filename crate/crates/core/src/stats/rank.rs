use serde::{Deserialize, Serialize};

use super::special::normal_two_sided_p;
use super::StatsError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankTestResult {
    /// Mann-Whitney U of the first sample: pairs with `x > y`, ties counting 1/2.
    pub u: f64,
    pub z: f64,
    pub p: f64,
    pub n1: usize,
    pub n2: usize,
}

/// 1-based ranks with ties given their average rank.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // positions i..j share ranks i+1..=j
        let avg = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = avg;
        }
        i = j;
    }
    ranks
}

/// Rank-sum test with the tie-corrected normal approximation, no continuity
/// correction: `z = (U - n1 n2 / 2) / sd(U)`.
pub fn mann_whitney_z(x: &[f64], y: &[f64]) -> Result<RankTestResult, StatsError> {
    let (n1, n2) = (x.len(), y.len());
    if n1 == 0 || n2 == 0 {
        return Err(StatsError::TooFew { needed: 1, got: 0 });
    }
    let pooled: Vec<f64> = x.iter().chain(y).copied().collect();
    let ranks = midranks(&pooled);
    let r1: f64 = ranks[..n1].iter().sum();
    let (f1, f2) = (n1 as f64, n2 as f64);
    let n = f1 + f2;
    let u = r1 - f1 * (f1 + 1.0) / 2.0;

    let mut sorted = pooled;
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    for group in sorted.chunk_by(|a, b| a == b) {
        let t = group.len() as f64;
        tie_term += t * t * t - t;
    }
    let variance = f1 * f2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if !(variance > 0.0) {
        return Err(StatsError::ZeroVariance);
    }
    let z = (u - f1 * f2 / 2.0) / variance.sqrt();
    Ok(RankTestResult { u, z, p: normal_two_sided_p(z), n1, n2 })
}
