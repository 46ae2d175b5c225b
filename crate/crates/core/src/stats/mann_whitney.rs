use serde::Serialize;
use statrs::function::erf::erfc;

use super::floor_p;
use crate::error::{Error, Result};

/// Largest pooled sample size for which `MwMode::Auto` enumerates the exact
/// null distribution (C(16, 8) = 12,870 labelings at most).
pub const EXACT_MAX_POOLED: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MwMode {
    #[default]
    Auto,
    Exact,
    Approx,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MwMethod {
    Exact,
    NormalApprox,
}

impl MwMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            MwMethod::Exact => "exact",
            MwMethod::NormalApprox => "normal_approx",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MannWhitneyResult {
    pub u_a: f64,
    pub u_b: f64,
    /// Two-sided.
    pub p_value: f64,
    pub method: MwMethod,
    /// Every pooled observation is tied; the test carries no information.
    pub degenerate: bool,
}

/// Average ranks (1-based) of `values`, ties sharing the mean of their
/// positions.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Two-sample Mann-Whitney test on midranks.
pub fn mann_whitney(a: &[f64], b: &[f64], mode: MwMode) -> Result<MannWhitneyResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("Mann-Whitney needs at least one observation per sample"));
    }
    if a.iter().chain(b).any(|v| v.is_nan()) {
        return Err(Error::invalid("NaN observation"));
    }
    let (na, nb) = (a.len(), b.len());
    let n = na + nb;
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = midranks(&pooled);
    // doubled midranks are integers
    let doubled: Vec<u64> = ranks.iter().map(|r| (r * 2.0).round() as u64).collect();
    let w2_a: u64 = doubled[..na].iter().sum();
    let u2_a = w2_a as i64 - (na * (na + 1)) as i64;
    let u_a = u2_a as f64 / 2.0;
    let u_b = (na * nb) as f64 - u_a;
    let degenerate = pooled.iter().all(|v| *v == pooled[0]);

    let use_exact = match mode {
        MwMode::Exact => true,
        MwMode::Approx => false,
        MwMode::Auto => n <= EXACT_MAX_POOLED,
    };
    let (p_value, method) = if degenerate {
        let method = if use_exact {
            MwMethod::Exact
        } else {
            MwMethod::NormalApprox
        };
        (1.0, method)
    } else if use_exact {
        (exact_p(&doubled, na, u2_a), MwMethod::Exact)
    } else {
        (normal_p(&ranks, na, nb, u_a), MwMethod::NormalApprox)
    };
    Ok(MannWhitneyResult {
        u_a,
        u_b,
        p_value: floor_p(p_value),
        method,
        degenerate,
    })
}

/// Share of all C(n, na) labelings whose U is at least as far from its
/// mean as the observed one. Counts subsets by (size, doubled rank sum).
fn exact_p(doubled: &[u64], na: usize, u2_obs: i64) -> f64 {
    let n = doubled.len();
    let nb = n - na;
    let max_sum: usize = doubled.iter().sum::<u64>() as usize;
    let mut counts = vec![vec![0.0f64; max_sum + 1]; na + 1];
    counts[0][0] = 1.0;
    for &r in doubled {
        let r = r as usize;
        for j in (1..=na).rev() {
            let (lo, hi) = counts.split_at_mut(j);
            for s in (r..=max_sum).rev() {
                hi[0][s] += lo[j - 1][s - r];
            }
        }
    }
    let centre2 = (na * nb) as i64;
    let offset = (na * (na + 1)) as i64;
    let observed_dev = (u2_obs - centre2).abs();
    let (mut extreme, mut total) = (0.0, 0.0);
    for (s, &c) in counts[na].iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        total += c;
        let u2 = s as i64 - offset;
        if (u2 - centre2).abs() >= observed_dev {
            extreme += c;
        }
    }
    extreme / total
}

/// Normal approximation with continuity correction and tie-corrected
/// variance.
fn normal_p(ranks: &[f64], na: usize, nb: usize, u_a: f64) -> f64 {
    let n = (na + nb) as f64;
    let mut sorted = ranks.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }
    let nanb = (na * nb) as f64;
    let var = nanb / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    let mean = nanb / 2.0;
    let dev = (u_a - mean).abs() - 0.5;
    if dev <= 0.0 {
        return 1.0;
    }
    let z = dev / var.sqrt();
    erfc(z / std::f64::consts::SQRT_2)
}
