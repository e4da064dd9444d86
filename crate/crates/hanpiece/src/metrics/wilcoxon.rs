//! Wilcoxon rank-sum (Mann-Whitney) test with midrank tie handling.
//!
//! The p-value is computed by exact enumeration of rank assignments when
//! both samples have at most [`EXACT_LIMIT`] observations, and by the normal
//! approximation with tie-corrected variance otherwise.

use itertools::Itertools;
use statrs::distribution::{ContinuousCDF, Normal};

use super::MetricsError;

/// Largest per-sample size for which the exact null distribution is
/// enumerated.
pub const EXACT_LIMIT: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct RankSumTest {
    /// Sum of the first sample's midranks.
    pub rank_sum: f64,
    /// Normal-approximation statistic `(W − μ) / σ`; 0 when every pooled
    /// value is tied.
    pub z: f64,
    /// Two-sided p-value.
    pub p: f64,
    /// True when `p` came from exact enumeration.
    pub exact: bool,
}

/// Midranks of the pooled samples, in pooled order, plus the tie-correction
/// term `Σ (t³ − t)` over tie groups.
fn midranks(pooled: &[f64]) -> (Vec<f64>, f64) {
    let mut order: Vec<usize> = (0..pooled.len()).collect();
    order.sort_by(|&i, &j| pooled[i].total_cmp(&pooled[j]));
    let mut ranks = vec![0.0; pooled.len()];
    let mut tie_term = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && pooled[order[end]] == pooled[order[start]] {
            end += 1;
        }
        // ranks are 1-based; a tie group gets the average of its positions
        let rank = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = rank;
        }
        let t = (end - start) as f64;
        tie_term += t * t * t - t;
        start = end;
    }
    (ranks, tie_term)
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut result = 1.0;
    for i in 0..k {
        result = result * (n - i) as f64 / (i + 1) as f64;
    }
    result
}

/// Exact two-sided p: the probability, over all equally likely assignments
/// of `na` of the pooled ranks to the first sample, of a rank sum at least
/// as far from its mean as the observed one.
fn exact_p(ranks: &[f64], na: usize, observed_deviation: f64) -> f64 {
    let n = ranks.len();
    let mean = na as f64 * (n + 1) as f64 / 2.0;
    let mut extreme = 0u64;
    let mut total = 0u64;
    for combo in (0..n).combinations(na) {
        let w: f64 = combo.iter().map(|&i| ranks[i]).sum();
        if (w - mean).abs() >= observed_deviation - 1e-9 {
            extreme += 1;
        }
        total += 1;
    }
    debug_assert_eq!(total as f64, binomial(n, na));
    extreme as f64 / total as f64
}

/// Rank-sum test of two independent samples.
pub fn wilcoxon_rank_sum(a: &[f64], b: &[f64]) -> Result<RankSumTest, MetricsError> {
    if a.is_empty() || b.is_empty() {
        return Err(MetricsError::EmptySample);
    }
    if a.iter().chain(b).any(|x| !x.is_finite()) {
        return Err(MetricsError::NonFiniteSample);
    }

    let na = a.len();
    let nb = b.len();
    let n = na + nb;
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (ranks, tie_term) = midranks(&pooled);

    let rank_sum: f64 = ranks[..na].iter().sum();
    let mean = na as f64 * (n + 1) as f64 / 2.0;
    let variance = (na as f64 * nb as f64 / 12.0)
        * ((n + 1) as f64 - tie_term / (n as f64 * (n - 1) as f64));

    if variance <= 0.0 {
        // every pooled value is identical
        return Ok(RankSumTest {
            rank_sum,
            z: 0.0,
            p: 1.0,
            exact: true,
        });
    }

    let z = (rank_sum - mean) / variance.sqrt();
    let (p, exact) = if na <= EXACT_LIMIT && nb <= EXACT_LIMIT {
        (exact_p(&ranks, na, (rank_sum - mean).abs()), true)
    } else {
        let normal = Normal::new(0.0, 1.0).expect("unit normal");
        ((2.0 * normal.cdf(-z.abs())).min(1.0), false)
    };

    Ok(RankSumTest {
        rank_sum,
        z,
        p,
        exact,
    })
}
