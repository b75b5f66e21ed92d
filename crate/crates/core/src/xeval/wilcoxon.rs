use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Largest effective sample size for which the exact null distribution is
/// used; larger samples use the normal approximation.
pub const EXACT_MAX_N: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alternative {
    TwoSided,
    /// x tends to be larger than y.
    Greater,
    /// x tends to be smaller than y.
    Less,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WilcoxonMethod {
    Exact,
    Normal,
    /// Every difference was zero; nothing to test.
    NoDifferences,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// `min(W+, W-)`.
    pub statistic: f64,
    pub w_plus: f64,
    pub w_minus: f64,
    pub p_value: f64,
    pub n_effective: usize,
    pub method: WilcoxonMethod,
    pub alternative: Alternative,
}

impl WilcoxonResult {
    pub fn no_differences(&self) -> bool {
        self.method == WilcoxonMethod::NoDifferences
    }
}

/// Two-sided Wilcoxon signed-rank test on paired samples.
pub fn wilcoxon_signed_rank(x: &[f64], y: &[f64]) -> Result<WilcoxonResult> {
    wilcoxon_with(x, y, Alternative::TwoSided)
}

/// Ranks of `|d|` (1-based, ties averaged), doubled so they are integers.
fn doubled_ranks(diffs: &[f64]) -> Vec<u64> {
    let mut order: Vec<usize> = (0..diffs.len()).collect();
    order.sort_by(|&a, &b| diffs[a].abs().total_cmp(&diffs[b].abs()));
    let mut ranks = vec![0; diffs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && diffs[order[j]].abs() == diffs[order[i]].abs() {
            j += 1;
        }
        // Positions i..j hold ranks i+1..=j; twice their mean is i+1+j.
        for &k in &order[i..j] {
            ranks[k] = (i + 1 + j) as u64;
        }
        i = j;
    }
    ranks
}

/// Number of sign assignments giving each doubled positive-rank sum.
fn null_counts(ranks: &[u64]) -> Vec<u64> {
    let total: u64 = ranks.iter().sum();
    let mut counts = vec![0u64; total as usize + 1];
    counts[0] = 1;
    let mut reach = 0usize;
    for &r in ranks {
        let r = r as usize;
        for s in (0..=reach).rev() {
            if counts[s] > 0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    counts
}

pub fn wilcoxon_with(x: &[f64], y: &[f64], alternative: Alternative) -> Result<WilcoxonResult> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { left: x.len(), right: y.len() });
    }
    if x.is_empty() {
        return Err(Error::EmptyInput("paired samples"));
    }
    let diffs: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).filter(|d| *d != 0.0).collect();
    let n = diffs.len();
    if n == 0 {
        return Ok(WilcoxonResult {
            statistic: 0.0,
            w_plus: 0.0,
            w_minus: 0.0,
            p_value: 1.0,
            n_effective: 0,
            method: WilcoxonMethod::NoDifferences,
            alternative,
        });
    }

    let ranks = doubled_ranks(&diffs);
    let total2: u64 = ranks.iter().sum();
    let plus2: u64 = diffs.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();
    let minus2 = total2 - plus2;
    let w_plus = plus2 as f64 / 2.0;
    let w_minus = minus2 as f64 / 2.0;

    let (p_value, method) = if n <= EXACT_MAX_N {
        let counts = null_counts(&ranks);
        let observed_min = plus2.min(minus2);
        let hits: u64 = counts
            .iter()
            .enumerate()
            .filter(|(s, c)| {
                let s = *s as u64;
                **c > 0
                    && match alternative {
                        Alternative::TwoSided => s.min(total2 - s) <= observed_min,
                        Alternative::Greater => s >= plus2,
                        Alternative::Less => s <= plus2,
                    }
            })
            .map(|(_, c)| c)
            .sum();
        (hits as f64 / (1u64 << n) as f64, WilcoxonMethod::Exact)
    } else {
        let nf = n as f64;
        let mean = nf * (nf + 1.0) / 4.0;
        let mut tie_term = 0.0;
        let mut sorted = ranks.clone();
        sorted.sort_unstable();
        for group in sorted.chunk_by(|a, b| a == b) {
            let t = group.len() as f64;
            tie_term += t * t * t - t;
        }
        let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term / 48.0;
        let z = (w_plus - mean) / var.sqrt();
        let phi = Normal::standard();
        let p = match alternative {
            Alternative::TwoSided => (2.0 * phi.cdf(-z.abs())).min(1.0),
            Alternative::Greater => phi.cdf(-z),
            Alternative::Less => phi.cdf(z),
        };
        (p, WilcoxonMethod::Normal)
    };

    Ok(WilcoxonResult {
        statistic: w_plus.min(w_minus),
        w_plus,
        w_minus,
        p_value,
        n_effective: n,
        method,
        alternative,
    })
}
