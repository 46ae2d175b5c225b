//! Least-squares segmentation of a series into constant-mean segments.
//!
//! For each break count `m` the globally optimal breakpoints are found by
//! dynamic programming over segment residual sums of squares; the count is
//! then chosen by minimum BIC,
//!
//! ```text
//! BIC(m) = n ln(RSS_m / n) + (2m + 1) ln n
//! ```
//!
//! counting `m` break positions and `m + 1` segment means as parameters.
//!
//! Breakpoints are 1-based indices of the last observation of a segment, so
//! breakpoint `b` means the next regime starts at observation `b + 1`.

use std::io::Write;

use chrono::NaiveDate;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::series::DailySeries;

pub const DEFAULT_M_MAX: usize = 5;
pub const DEFAULT_TRIM_FRACTION: f64 = 0.15;

/// `ceil(fraction * n)`, never below 1.
pub fn h_min_for(n: usize, fraction: f64) -> usize {
    // integer arithmetic on the conventional 0.15 avoids 0.15 * 20 = 3.0000000000000004
    let hundredths = (fraction * 100.0).round();
    let h = if (fraction * 100.0 - hundredths).abs() < 1e-9 {
        (hundredths as usize * n).div_ceil(100)
    } else {
        (fraction * n as f64).ceil() as usize
    };
    h.max(1)
}

pub fn default_h_min(n: usize) -> usize {
    h_min_for(n, DEFAULT_TRIM_FRACTION)
}

/// O(1) segment costs from prefix sums of the (centred) series and its
/// squares.
#[derive(Debug, Clone)]
pub struct SegmentCosts {
    s1: Vec<f64>,
    s2: Vec<f64>,
}

impl SegmentCosts {
    pub fn new(y: &[f64]) -> Self {
        let centre = if y.is_empty() {
            0.0
        } else {
            y.iter().sum::<f64>() / y.len() as f64
        };
        let mut s1 = Vec::with_capacity(y.len() + 1);
        let mut s2 = Vec::with_capacity(y.len() + 1);
        s1.push(0.0);
        s2.push(0.0);
        for v in y {
            let c = v - centre;
            s1.push(s1.last().unwrap() + c);
            s2.push(s2.last().unwrap() + c * c);
        }
        SegmentCosts { s1, s2 }
    }

    pub fn len(&self) -> usize {
        self.s1.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// RSS of a constant fit to observations `i..=j` (1-based).
    pub fn cost(&self, i: usize, j: usize) -> f64 {
        debug_assert!(1 <= i && i <= j && j <= self.len());
        let len = (j - i + 1) as f64;
        let sum = self.s1[j] - self.s1[i - 1];
        let sq = self.s2[j] - self.s2[i - 1];
        (sq - sum * sum / len).max(0.0)
    }
}

/// RSS of a constant fit to `y[i..=j]`, 1-based inclusive.
pub fn segment_cost(y: &[f64], i: usize, j: usize) -> f64 {
    assert!(
        1 <= i && i <= j && j <= y.len(),
        "segment {i}..={j} outside 1..={}",
        y.len()
    );
    SegmentCosts::new(&y[i - 1..j]).cost(1, j - i + 1)
}

/// Breakpoints and total RSS of one segmentation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Partition {
    pub breakpoints: Vec<usize>,
    pub rss: f64,
}

fn check_feasible(n: usize, m: usize, h_min: usize) -> Result<()> {
    if h_min == 0 {
        return Err(Error::invalid("minimum segment length must be at least 1"));
    }
    if (m + 1) * h_min > n {
        return Err(Error::Infeasible { n, m, h_min });
    }
    Ok(())
}

/// Suffix dynamic program. `table[k][s]` is the minimal RSS of splitting
/// observations `s+1..=n` into `k + 1` segments of length `>= h_min`.
struct SuffixTable {
    costs: SegmentCosts,
    h_min: usize,
    table: Vec<Vec<f64>>,
}

impl SuffixTable {
    fn build(y: &[f64], m_max: usize, h_min: usize) -> Self {
        let n = y.len();
        let costs = SegmentCosts::new(y);
        let mut table = vec![vec![f64::INFINITY; n + 1]; m_max + 1];
        for s in 0..n {
            if n - s >= h_min {
                table[0][s] = costs.cost(s + 1, n);
            }
        }
        for k in 1..=m_max {
            for s in 0..n {
                if n - s < (k + 1) * h_min {
                    continue;
                }
                let mut best = f64::INFINITY;
                for b in (s + h_min)..=(n - k * h_min) {
                    let v = costs.cost(s + 1, b) + table[k - 1][b];
                    if v < best {
                        best = v;
                    }
                }
                table[k][s] = best;
            }
        }
        SuffixTable { costs, h_min, table }
    }

    /// Lexicographically smallest optimal breakpoint list for `m` breaks.
    fn reconstruct(&self, m: usize) -> Partition {
        let n = self.costs.len();
        let mut breakpoints = Vec::with_capacity(m);
        let mut s = 0;
        for k in (1..=m).rev() {
            let target = self.table[k][s];
            let tol = 1e-12 * (1.0 + target.abs());
            let b = ((s + self.h_min)..=(n - k * self.h_min))
                .find(|&b| self.costs.cost(s + 1, b) + self.table[k - 1][b] <= target + tol)
                .expect("optimal split must be attainable");
            breakpoints.push(b);
            s = b;
        }
        Partition {
            breakpoints,
            rss: self.table[m][0],
        }
    }
}

/// Globally minimal RSS placement of `m` breaks with every segment at least
/// `h_min` long. Ties go to the lexicographically smallest breakpoint list.
pub fn optimal_breakpoints(y: &[f64], m: usize, h_min: usize) -> Result<Partition> {
    check_feasible(y.len(), m, h_min)?;
    Ok(SuffixTable::build(y, m, h_min).reconstruct(m))
}

fn serialize_bic<S: Serializer>(bic: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if bic.is_finite() {
        s.serialize_f64(*bic)
    } else {
        s.serialize_str("-inf")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentFit {
    pub m: usize,
    pub breakpoints: Vec<usize>,
    pub rss: f64,
    /// `-inf` when `rss` is exactly zero.
    #[serde(serialize_with = "serialize_bic")]
    pub bic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentationResult {
    pub n: usize,
    pub h_min: usize,
    pub per_m: Vec<SegmentFit>,
    pub chosen_m: usize,
}

impl SegmentationResult {
    pub fn chosen(&self) -> &SegmentFit {
        &self.per_m[self.chosen_m]
    }

    /// Segment means of the chosen fit, one per observation.
    pub fn fitted_means(&self, y: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(y.len());
        let mut start = 0;
        for end in self
            .chosen()
            .breakpoints
            .iter()
            .copied()
            .chain(std::iter::once(y.len()))
        {
            let seg = &y[start..end];
            let mean = seg.iter().sum::<f64>() / seg.len() as f64;
            out.extend(std::iter::repeat_n(mean, seg.len()));
            start = end;
        }
        out
    }
}

pub fn bic(n: usize, m: usize, rss: f64) -> f64 {
    if rss <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let nf = n as f64;
    nf * (rss / nf).ln() + (2 * m + 1) as f64 * nf.ln()
}

/// Optimal segmentations for every `m` in `0..=m_max`, with the count
/// chosen by minimum BIC (smallest `m` on ties).
pub fn select_m_bic(y: &[f64], m_max: usize, h_min: usize) -> Result<SegmentationResult> {
    let n = y.len();
    check_feasible(n, m_max, h_min)?;
    let table = SuffixTable::build(y, m_max, h_min);
    let per_m: Vec<SegmentFit> = (0..=m_max)
        .map(|m| {
            let p = table.reconstruct(m);
            SegmentFit {
                m,
                bic: bic(n, m, p.rss),
                breakpoints: p.breakpoints,
                rss: p.rss,
            }
        })
        .collect();
    let chosen_m = per_m
        .iter()
        .fold(0, |best, fit| if fit.bic < per_m[best].bic { fit.m } else { best });
    Ok(SegmentationResult {
        n,
        h_min,
        per_m,
        chosen_m,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub m: usize,
    pub breakpoints: Vec<usize>,
    /// First day of each new segment.
    pub break_dates: Vec<NaiveDate>,
    pub rss: f64,
    #[serde(serialize_with = "serialize_bic")]
    pub bic: f64,
}

/// JSON layout of a segmentation attached to a dated series.
#[derive(Debug, Clone, Serialize)]
pub struct SegmentationReport {
    pub label: String,
    pub n: usize,
    pub h_min: usize,
    pub per_m: Vec<FitReport>,
    pub chosen_m: usize,
}

impl SegmentationReport {
    pub fn new(series: &DailySeries, result: &SegmentationResult) -> Self {
        let per_m = result
            .per_m
            .iter()
            .map(|fit| FitReport {
                m: fit.m,
                breakpoints: fit.breakpoints.clone(),
                break_dates: fit.breakpoints.iter().map(|&b| series.date_at(b)).collect(),
                rss: fit.rss,
                bic: fit.bic,
            })
            .collect();
        SegmentationReport {
            label: series.label.clone(),
            n: result.n,
            h_min: result.h_min,
            per_m,
            chosen_m: result.chosen_m,
        }
    }

    pub fn chosen_break_dates(&self) -> &[NaiveDate] {
        &self.per_m[self.chosen_m].break_dates
    }
}

/// `m,rss,bic` rows.
pub fn write_bic_csv<W: Write>(result: &SegmentationResult, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["m", "rss", "bic"])?;
    for fit in &result.per_m {
        let bic = if fit.bic.is_finite() {
            fit.bic.to_string()
        } else {
            "-inf".to_string()
        };
        w.write_record([fit.m.to_string(), fit.rss.to_string(), bic])?;
    }
    w.flush()?;
    Ok(())
}

/// `date,value,segment_mean` rows for the chosen fit.
pub fn write_fit_csv<W: Write>(series: &DailySeries, result: &SegmentationResult, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["date", "value", "segment_mean"])?;
    let means = result.fitted_means(&series.values);
    for ((d, v), m) in series.dates().zip(&series.values).zip(means) {
        w.write_record([d.to_string(), v.to_string(), m.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_cost_examples() {
        assert_eq!(segment_cost(&[2.0, 2.0, 2.0], 1, 3), 0.0);
        assert!((segment_cost(&[0.0, 2.0], 1, 2) - 2.0).abs() < 1e-12);
        assert_eq!(segment_cost(&[7.0], 1, 1), 0.0);
        assert!((segment_cost(&[9.0, 0.0, 2.0, 9.0], 2, 3) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn step_series_breaks_at_the_step() {
        let y: Vec<f64> = (0..20).map(|i| if i < 10 { 0.0 } else { 5.0 }).collect();
        let p = optimal_breakpoints(&y, 1, 2).unwrap();
        assert_eq!(p.breakpoints, vec![10]);
        assert_eq!(p.rss, 0.0);
    }

    #[test]
    fn flat_series_takes_earliest_feasible_break() {
        let y = vec![3.0; 12];
        let p = optimal_breakpoints(&y, 1, 3).unwrap();
        assert_eq!(p.breakpoints, vec![3]);
        assert_eq!(p.rss, optimal_breakpoints(&y, 0, 3).unwrap().rss);
        let p = optimal_breakpoints(&y, 2, 3).unwrap();
        assert_eq!(p.breakpoints, vec![3, 6]);
    }

    #[test]
    fn zero_breaks_is_whole_segment() {
        let y = [1.0, 4.0, 2.0, 8.0];
        let p = optimal_breakpoints(&y, 0, 1).unwrap();
        assert!(p.breakpoints.is_empty());
        assert!((p.rss - segment_cost(&y, 1, 4)).abs() < 1e-12);
    }

    #[test]
    fn infeasible_counts_are_rejected() {
        let y = [0.0; 10];
        assert!(matches!(optimal_breakpoints(&y, 2, 4), Err(Error::Infeasible { .. })));
        assert!(optimal_breakpoints(&y, 1, 5).is_ok());
        assert!(select_m_bic(&y, 5, 2).is_err());
    }

    #[test]
    fn bic_curve_and_zero_rss_sentinel() {
        let y: Vec<f64> = (0..20).map(|i| if i < 10 { 0.0 } else { 5.0 }).collect();
        let r = select_m_bic(&y, 2, 3).unwrap();
        assert_eq!(r.per_m[1].bic, f64::NEG_INFINITY);
        assert_eq!(r.chosen_m, 1);
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"-inf\""));
    }

    #[test]
    fn h_min_defaults() {
        assert_eq!(default_h_min(20), 3);
        assert_eq!(default_h_min(244), 37);
        assert_eq!(default_h_min(100), 15);
        assert_eq!(default_h_min(3), 1);
        assert_eq!(h_min_for(10, 0.33), 4);
    }

    #[test]
    fn fitted_means_follow_segments() {
        let y = vec![1.0, 3.0, 10.0, 10.0, 10.0];
        let r = select_m_bic(&y, 1, 2).unwrap();
        let means = SegmentationResult { chosen_m: 1, ..r }.fitted_means(&y);
        assert_eq!(means, vec![2.0, 2.0, 10.0, 10.0, 10.0]);
    }
}
