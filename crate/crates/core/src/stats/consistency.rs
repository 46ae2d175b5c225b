//! Checks that printed regression and classification summaries obey the
//! identities their definitions imply, allowing for the rounding of the
//! printed figures.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One printed `(beta_std, r2)` pair from a lag-regression table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublishedPair {
    pub lexicon: String,
    pub k: usize,
    pub beta_std: f64,
    pub r2: f64,
}

impl PublishedPair {
    /// Reads `lexicon,k,beta_std,r2` CSV rows.
    pub fn read_csv<R: Read>(reader: R) -> Result<Vec<PublishedPair>> {
        let mut rdr = csv::Reader::from_reader(reader);
        rdr.deserialize()
            .enumerate()
            .map(|(i, row)| {
                row.map_err(|e| Error::Parse {
                    what: "published pairs csv",
                    line: i + 2,
                    message: e.to_string(),
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub checked: usize,
    /// Pairs where `r2` is exactly `round(beta_std^2)` at the printed
    /// precision.
    pub exact_matches: usize,
    /// Pairs for which some `beta_std` that rounds to the printed value
    /// squares to something that rounds to the printed `r2`.
    pub consistent: usize,
    pub flagged: Vec<PublishedPair>,
}

fn round_to(x: f64, decimals: u32) -> f64 {
    let scale = 10f64.powi(decimals as i32);
    (x * scale + 1e-9).round() / scale
}

/// In simple regression `r2 = beta_std^2`. With both figures printed to
/// `decimals` places, a pair is consistent when the interval of true
/// `beta_std^2` values compatible with the printed `beta_std` overlaps the
/// interval of true `r2` values compatible with the printed `r2`.
pub fn check_published_pairs(pairs: &[PublishedPair], decimals: u32) -> ConsistencyReport {
    let half = 0.5 * 10f64.powi(-(decimals as i32));
    let eps = 1e-12;
    let mut exact_matches = 0;
    let mut flagged = Vec::new();
    for p in pairs {
        let b = p.beta_std.abs();
        if round_to(b * b, decimals) == round_to(p.r2, decimals) {
            exact_matches += 1;
        }
        let lo_b = (b - half).max(0.0);
        let (sq_lo, sq_hi) = (lo_b * lo_b, (b + half) * (b + half));
        let (r_lo, r_hi) = (p.r2 - half, p.r2 + half);
        if !(sq_hi >= r_lo - eps && sq_lo <= r_hi + eps) {
            flagged.push(p.clone());
        }
    }
    ConsistencyReport {
        checked: pairs.len(),
        exact_matches,
        consistent: pairs.len() - flagged.len(),
        flagged,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccuracyCheck {
    /// Correct predictions per class, `round(recall * support)`.
    pub true_positives: Vec<u64>,
    pub implied_accuracy: f64,
    pub consistent: bool,
}

/// Recomputes accuracy from per-class supports and printed recalls and
/// compares it with the printed accuracy, allowing one rounding step on each
/// side.
pub fn check_reported_accuracy(
    supports: &[u64],
    recalls: &[f64],
    reported: f64,
    decimals: u32,
) -> Result<AccuracyCheck> {
    if supports.len() != recalls.len() || supports.is_empty() {
        return Err(Error::invalid(
            "supports and recalls must be nonempty and the same length",
        ));
    }
    let total: u64 = supports.iter().sum();
    if total == 0 {
        return Err(Error::invalid("zero total support"));
    }
    let half = 0.5 * 10f64.powi(-(decimals as i32));
    let true_positives: Vec<u64> = supports
        .iter()
        .zip(recalls)
        .map(|(&s, &r)| (r * s as f64).round() as u64)
        .collect();
    let implied_accuracy = true_positives.iter().sum::<u64>() as f64 / total as f64;
    Ok(AccuracyCheck {
        consistent: (implied_accuracy - reported).abs() <= 2.0 * half + 1e-12,
        true_positives,
        implied_accuracy,
    })
}
