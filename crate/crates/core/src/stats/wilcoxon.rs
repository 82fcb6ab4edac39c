use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Largest effective sample size for which the exact null distribution is
/// enumerated.
pub const EXACT_MAX_N: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WilcoxonResult {
    /// Pairs left after dropping zero differences.
    pub n: usize,
    pub w_plus: f64,
    pub w_minus: f64,
    /// `min(W+, W-)`.
    pub statistic: f64,
    /// Continuity-corrected normal score with tie-corrected variance; the
    /// sign follows `W+ - n(n+1)/4`.
    pub z: f64,
    pub p_normal: f64,
    pub p_exact: Option<f64>,
    /// Two-sided p-value: exact when available, otherwise normal.
    pub p: f64,
}

/// Average ranks of `values`, doubled so ties stay integral.
fn doubled_ranks(values: &[f64]) -> Vec<u64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0u64; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // positions i..=j hold ranks i+1..=j+1, whose mean doubled is i+j+2
        for &k in &order[i..=j] {
            ranks[k] = (i + j + 2) as u64;
        }
        i = j + 1;
    }
    ranks
}

/// Wilcoxon signed-rank test on paired observations, differences `x - y`.
///
/// Zero differences are dropped and tied magnitudes share average ranks.
/// For up to [`EXACT_MAX_N`] non-zero pairs the two-sided p-value is exact,
/// counting sign assignments whose `W+` lies at least as far from its mean
/// as the observed one.
pub fn wilcoxon_signed_rank(pairs: &[(f64, f64)]) -> Result<WilcoxonResult> {
    if pairs.is_empty() {
        return Err(Error::invalid("wilcoxon test needs at least one pair"));
    }
    if pairs.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::NonFinite("wilcoxon input"));
    }
    let diffs: Vec<f64> = pairs.iter().map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
    let n = diffs.len();
    if n == 0 {
        return Ok(WilcoxonResult {
            n,
            w_plus: 0.0,
            w_minus: 0.0,
            statistic: 0.0,
            z: 0.0,
            p_normal: 1.0,
            p_exact: Some(1.0),
            p: 1.0,
        });
    }

    let magnitudes: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks2 = doubled_ranks(&magnitudes);
    let total2: u64 = ranks2.iter().sum();
    let w_plus2: u64 = ranks2.iter().zip(&diffs).filter(|(_, d)| **d > 0.0).map(|(r, _)| r).sum();
    let w_plus = w_plus2 as f64 / 2.0;
    let w_minus = (total2 - w_plus2) as f64 / 2.0;

    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let mut tie_term = 0.0;
    let mut sorted = ranks2.clone();
    sorted.sort_unstable();
    for group in sorted.chunk_by(|a, b| a == b) {
        let t = group.len() as f64;
        tie_term += t * t * t - t;
    }
    let variance = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term / 48.0;
    let dev = w_plus - mean;
    let z = dev.signum() * (dev.abs() - 0.5).max(0.0) / variance.sqrt();
    let normal = Normal::standard();
    let p_normal = (2.0 * (1.0 - normal.cdf(z.abs()))).min(1.0);

    let p_exact = (n <= EXACT_MAX_N).then(|| exact_p(&ranks2, w_plus2));
    Ok(WilcoxonResult {
        n,
        w_plus,
        w_minus,
        statistic: w_plus.min(w_minus),
        z,
        p_normal,
        p_exact,
        p: p_exact.unwrap_or(p_normal),
    })
}

/// Exact two-sided p from the subset-sum distribution of doubled ranks.
fn exact_p(ranks2: &[u64], observed2: u64) -> f64 {
    let total2: u64 = ranks2.iter().sum();
    let mut counts = vec![0u64; total2 as usize + 1];
    counts[0] = 1;
    for &r in ranks2 {
        for s in (r as usize..counts.len()).rev() {
            counts[s] += counts[s - r as usize];
        }
    }
    let obs = (2 * observed2).abs_diff(total2);
    let extreme: u64 = counts
        .iter()
        .enumerate()
        .filter(|(s, _)| (2 * *s as u64).abs_diff(total2) >= obs)
        .map(|(_, c)| c)
        .sum();
    extreme as f64 / (1u64 << ranks2.len()) as f64
}
