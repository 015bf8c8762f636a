//! Wilcoxon signed-rank test and Friedman average ranks.

use serde::{Deserialize, Serialize};

use super::MetricError;
use crate::special::normal_cdf;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wilcoxon {
    /// Rank sum of pairs where `b > a`.
    pub r_plus: f64,
    /// Rank sum of pairs where `b < a`.
    pub r_minus: f64,
    /// Two-sided p-value.
    pub p: f64,
    /// Pairs left after dropping zero differences.
    pub n: usize,
}

/// Largest sample handled with the exact null distribution.
pub const EXACT_LIMIT: usize = 25;

/// Average ranks (1-based) of `values`, ties sharing the mean rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Signed-rank test on the differences `b − a`. Exact for up to
/// [`EXACT_LIMIT`] non-zero differences, normal approximation with tie and
/// continuity correction above.
pub fn wilcoxon_signed_rank(pairs: &[(f64, f64)]) -> Result<Wilcoxon, MetricError> {
    let diffs: Vec<f64> = pairs.iter().map(|(a, b)| b - a).filter(|d| *d != 0.0).collect();
    if diffs.is_empty() {
        return Err(MetricError::AllZeroDifferences);
    }
    let n = diffs.len();
    if n < 5 {
        return Err(MetricError::TooFewPairs(n));
    }
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = average_ranks(&abs);
    let r_plus: f64 = diffs.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();
    let total = (n * (n + 1)) as f64 / 2.0;
    let r_minus = total - r_plus;

    let p = if n <= EXACT_LIMIT {
        exact_p(&ranks, r_plus)
    } else {
        let mean = total / 2.0;
        let mut ties = 0.0;
        let mut sorted = abs.clone();
        sorted.sort_by(f64::total_cmp);
        let mut i = 0;
        while i < n {
            let mut j = i;
            while j + 1 < n && sorted[j + 1] == sorted[i] {
                j += 1;
            }
            let t = (j - i + 1) as f64;
            ties += t * t * t - t;
            i = j + 1;
        }
        let nf = n as f64;
        let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - ties / 48.0;
        let z = ((r_plus - mean).abs() - 0.5).max(0.0) / var.sqrt();
        (2.0 * (1.0 - normal_cdf(z))).min(1.0)
    };
    Ok(Wilcoxon { r_plus, r_minus, p, n })
}

/// Two-sided exact p by counting sign assignments over doubled ranks.
fn exact_p(ranks: &[f64], r_plus: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let max: usize = doubled.iter().sum();
    let mut counts = vec![0u64; max + 1];
    counts[0] = 1;
    let mut reach = 0;
    for &r in &doubled {
        for s in (0..=reach).rev() {
            if counts[s] > 0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    let w = (2.0 * r_plus).round() as usize;
    let all = 2f64.powi(ranks.len() as i32);
    let lower: u64 = counts[..=w].iter().sum();
    let upper: u64 = counts[w..].iter().sum();
    (2.0 * lower.min(upper) as f64 / all).min(1.0)
}

/// Average rank of each algorithm (column) over problems (rows). With
/// `minimize`, the smallest score in a row gets rank 1.
pub fn friedman_ranks(matrix: &[Vec<f64>], minimize: bool) -> Result<Vec<f64>, MetricError> {
    if matrix.len() < 2 {
        return Err(MetricError::InvalidArgument("need at least two problems"));
    }
    let k = matrix[0].len();
    if k < 2 {
        return Err(MetricError::InvalidArgument("need at least two algorithms"));
    }
    let mut sums = vec![0.0; k];
    for (row, scores) in matrix.iter().enumerate() {
        if scores.len() != k {
            return Err(MetricError::RaggedMatrix { row, expected: k, got: scores.len() });
        }
        let keyed: Vec<f64> = if minimize { scores.clone() } else { scores.iter().map(|v| -v).collect() };
        for (s, r) in sums.iter_mut().zip(average_ranks(&keyed)) {
            *s += r;
        }
    }
    Ok(sums.into_iter().map(|s| s / matrix.len() as f64).collect())
}
