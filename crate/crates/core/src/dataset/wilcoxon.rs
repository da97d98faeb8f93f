use crate::error::{Error, Result};
use crate::special::std_normal_cdf;

const EXACT_MAX_N: usize = 20;
const MIN_PAIRS: usize = 5;

/// Nonzero differences with their doubled mid-ranks of `|d|`.
fn doubled_ranks(differences: &[f64]) -> Vec<(f64, u64)> {
    let mut d: Vec<f64> = differences.iter().copied().filter(|&x| x != 0.0).collect();
    d.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    let mut out = Vec::with_capacity(d.len());
    let mut i = 0;
    while i < d.len() {
        let mut j = i;
        while j + 1 < d.len() && d[j + 1].abs() == d[i].abs() {
            j += 1;
        }
        // Ranks i+1..=j+1 share the mid-rank (i + j + 2) / 2.
        let r2 = (i + j + 2) as u64;
        for &x in &d[i..=j] {
            out.push((x, r2));
        }
        i = j + 1;
    }
    out
}

/// One-sided Wilcoxon signed-rank test of the hypothesis that the paired
/// differences are symmetric about zero, against a positive shift.
///
/// Zeros are dropped and tied magnitudes get mid-ranks. With at most 20
/// nonzero differences the p-value is exact under the conditional null
/// (all sign patterns equally likely); above that a normal approximation with
/// tie and continuity corrections is used.
pub fn signed_rank_test(differences: &[f64]) -> Result<f64> {
    if differences.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("differences must be finite"));
    }
    let ranked = doubled_ranks(differences);
    let n = ranked.len();
    if n < MIN_PAIRS {
        return Err(Error::TooFewPairs(n));
    }
    let w2: u64 = ranked.iter().filter(|(x, _)| *x > 0.0).map(|(_, r)| r).sum();
    if n <= EXACT_MAX_N {
        return Ok(exact_upper_tail(&ranked, w2));
    }
    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let mut ties = 0.0;
    let mut i = 0;
    while i < n {
        let mut t = 1;
        while i + t < n && ranked[i + t].1 == ranked[i].1 {
            t += 1;
        }
        let t = t as f64;
        ties += t * t * t - t;
        i += t as usize;
    }
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - ties / 48.0;
    if var <= 0.0 {
        return Ok(if w2 as f64 / 2.0 > mean { 0.0 } else { 1.0 });
    }
    let z = (w2 as f64 / 2.0 - mean - 0.5) / var.sqrt();
    Ok(std_normal_cdf(-z))
}

/// `P(W+ >= observed)` with each sign independently +-1 with probability 1/2.
fn exact_upper_tail(ranked: &[(f64, u64)], w2: u64) -> f64 {
    let total: u64 = ranked.iter().map(|(_, r)| r).sum();
    let mut counts = vec![0.0f64; total as usize + 1];
    counts[0] = 1.0;
    let mut reach = 0usize;
    for &(_, r) in ranked {
        let r = r as usize;
        for s in (0..=reach).rev() {
            if counts[s] != 0.0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    let tail: f64 = counts[w2 as usize..].iter().sum();
    tail / 2f64.powi(ranked.len() as i32)
}

/// Enumerates all `2^n` sign patterns; only for checking the exact path.
pub fn signed_rank_exact_brute_force(differences: &[f64]) -> Result<f64> {
    let ranked = doubled_ranks(differences);
    let n = ranked.len();
    if n < MIN_PAIRS {
        return Err(Error::TooFewPairs(n));
    }
    if n > 24 {
        return Err(Error::invalid("brute force limited to 24 differences"));
    }
    let w2: u64 = ranked.iter().filter(|(x, _)| *x > 0.0).map(|(_, r)| r).sum();
    let mut hits = 0u64;
    for mask in 0u64..(1 << n) {
        let s: u64 = (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| ranked[i].1).sum();
        if s >= w2 {
            hits += 1;
        }
    }
    Ok(hits as f64 / (1u64 << n) as f64)
}
