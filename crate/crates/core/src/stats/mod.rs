//! Simple regression, the lag sweep, Student-t tails and the Mann-Whitney
//! rank test.

mod consistency;
mod mann_whitney;
mod ols;
mod tdist;

pub use consistency::{
    check_published_pairs, check_reported_accuracy, AccuracyCheck, ConsistencyReport, PublishedPair,
};
pub use mann_whitney::{mann_whitney, midranks, MannWhitneyResult, MwMethod, MwMode, EXACT_MAX_POOLED};
pub use ols::{lag_sweep, ols_simple, write_lag_csv, LagRegressionResult, OlsFit};
pub use tdist::{student_t_sf, two_sided_p};

/// Smallest p-value ever reported.
pub const P_FLOOR: f64 = f64::MIN_POSITIVE;

pub(crate) fn floor_p(p: f64) -> f64 {
    if p.is_nan() {
        return 1.0;
    }
    p.clamp(P_FLOOR, 1.0)
}

/// Formats a p-value for reports; anything below 1e-15 prints as `< 1e-15`.
pub fn format_p(p: f64) -> String {
    if p < 1e-15 {
        "< 1e-15".to_string()
    } else {
        p.to_string()
    }
}
