use std::io::Write;

use serde::Serialize;

use super::{format_p, two_sided_p};
use crate::error::{Error, Result};
use crate::series::DailySeries;

/// Least-squares fit of `y = alpha + beta * x + e`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OlsFit {
    pub alpha: f64,
    pub beta: f64,
    /// `beta * sd(x) / sd(y)`, which is the Pearson correlation.
    pub beta_std: f64,
    pub r2: f64,
    pub se_beta: f64,
    pub t_stat: f64,
    pub p_value: f64,
    pub n: usize,
    #[serde(skip)]
    pub residuals: Vec<f64>,
}

pub fn ols_simple(x: &[f64], y: &[f64]) -> Result<OlsFit> {
    if x.len() != y.len() {
        return Err(Error::invalid(format!("length mismatch: {} vs {}", x.len(), y.len())));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::invalid(format!("need at least 3 observations, got {n}")));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite observation"));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (xi, yi) in x.iter().zip(y) {
        let dx = xi - mx;
        let dy = yi - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if !(sxx > 0.0) {
        return Err(Error::ZeroVariance("predictor".into()));
    }
    if !(syy > 0.0) {
        return Err(Error::ZeroVariance("response".into()));
    }
    let beta = sxy / sxx;
    let alpha = my - beta * mx;
    let beta_std = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    let r2 = beta_std * beta_std;
    let residuals: Vec<f64> = x.iter().zip(y).map(|(xi, yi)| yi - alpha - beta * xi).collect();
    let ssr: f64 = residuals.iter().map(|e| e * e).sum();
    let se_beta = (ssr / (nf - 2.0) / sxx).sqrt();
    let t_stat = if se_beta > 0.0 {
        beta / se_beta
    } else {
        f64::INFINITY.copysign(beta)
    };
    let p_value = two_sided_p(t_stat, nf - 2.0);
    Ok(OlsFit {
        alpha,
        beta,
        beta_std,
        r2,
        se_beta,
        t_stat,
        p_value,
        n,
        residuals,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LagRegressionResult {
    pub lexicon_label: String,
    pub k: usize,
    pub fit: OlsFit,
}

/// Regresses `y_t` on `x_{t-k}` for every `k` in `0..=k_max`, so the
/// predictor leads the response by `k` days. Both series must cover the same
/// calendar.
pub fn lag_sweep(x: &DailySeries, y: &DailySeries, k_max: usize) -> Result<Vec<LagRegressionResult>> {
    if x.start_date != y.start_date || x.len() != y.len() {
        return Err(Error::invalid(format!(
            "series {} and {} are not aligned on the same calendar",
            x.label, y.label
        )));
    }
    let n = x.len();
    if n <= k_max + 2 {
        return Err(Error::invalid(format!(
            "series of length {n} too short for lag {k_max}"
        )));
    }
    (0..=k_max)
        .map(|k| {
            let fit =
                ols_simple(&x.values[..n - k], &y.values[k..]).map_err(|e| Error::Lag { k, source: Box::new(e) })?;
            Ok(LagRegressionResult {
                lexicon_label: x.label.clone(),
                k,
                fit,
            })
        })
        .collect()
}

/// `lexicon,k,beta_std,r2,p_value,n` rows.
pub fn write_lag_csv<W: Write>(rows: &[LagRegressionResult], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["lexicon", "k", "beta_std", "r2", "p_value", "n"])?;
    for r in rows {
        w.write_record([
            r.lexicon_label.clone(),
            r.k.to_string(),
            r.fit.beta_std.to_string(),
            r.fit.r2.to_string(),
            format_p(r.fit.p_value),
            r.fit.n.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;
    use proptest::prelude::*;

    #[test]
    fn identity_fit() {
        let f = ols_simple(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(f.beta_std, 1.0);
        assert_eq!(f.r2, 1.0);
        assert!(f.p_value > 0.0 && f.p_value <= 1.0);
    }

    #[test]
    fn doubled_response() {
        let f = ols_simple(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap();
        assert_eq!(f.beta, 2.0);
        assert_eq!(f.alpha, 0.0);
        assert_eq!(f.beta_std, 1.0);
        assert_eq!(f.r2, 1.0);
    }

    #[test]
    fn zero_variance_is_an_error() {
        let e = ols_simple(&[1.0, 2.0, 3.0], &[5.0, 5.0, 5.0]).unwrap_err();
        assert!(e.to_string().contains("zero variance"));
        assert!(ols_simple(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
        assert!(ols_simple(&[1.0, 2.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn textbook_example() {
        // x = 1..5, y = [2, 4, 5, 4, 5]: beta = 0.6, alpha = 2.2, r2 = 0.6
        let f = ols_simple(&[1.0, 2.0, 3.0, 4.0, 5.0], &[2.0, 4.0, 5.0, 4.0, 5.0]).unwrap();
        assert!((f.beta - 0.6).abs() < 1e-12);
        assert!((f.alpha - 2.2).abs() < 1e-12);
        assert!((f.r2 - 0.6).abs() < 1e-12);
        let ssr: f64 = f.residuals.iter().map(|e| e * e).sum();
        assert!((ssr - 2.4).abs() < 1e-12);
        // se = sqrt(2.4 / 3 / 10)
        assert!((f.se_beta - (0.08f64).sqrt()).abs() < 1e-12);
    }

    fn series(label: &str, values: Vec<f64>) -> DailySeries {
        DailySeries::new(label, NaiveDate::from_ymd_opt(2019, 10, 1).unwrap(), values).unwrap()
    }

    #[test]
    fn lag_zero_is_plain_fit_and_lag_shifts_predictor() {
        let xs: Vec<f64> = (0..30).map(|i| ((i * 7) % 11) as f64).collect();
        let ys: Vec<f64> = (0..30)
            .map(|i| if i >= 3 { xs[i - 3] * 2.0 + 1.0 } else { 0.0 })
            .collect();
        let rows = lag_sweep(&series("x", xs.clone()), &series("y", ys.clone()), 5).unwrap();
        assert_eq!(rows.len(), 6);
        assert_eq!(rows[0].fit, ols_simple(&xs, &ys).unwrap());
        assert!((rows[3].fit.r2 - 1.0).abs() < 1e-12);
        assert_eq!(rows[3].fit.n, 27);
    }

    #[test]
    fn lag_sweep_rejects_misaligned_or_short() {
        let a = series("x", vec![1.0, 2.0, 3.0, 4.0]);
        let b = series("y", vec![1.0, 3.0, 2.0]);
        assert!(lag_sweep(&a, &b, 0).is_err());
        assert!(lag_sweep(&a, &a, 2).is_err());
        let flat_tail = series("y", vec![1.0, 2.0, 5.0, 5.0, 5.0]);
        let x = series("x", vec![1.0, 2.0, 3.0, 4.0, 6.0]);
        match lag_sweep(&x, &flat_tail, 2) {
            Err(Error::Lag { k: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    proptest! {
        #[test]
        fn affine_predictor_changes(
            xs in proptest::collection::vec(-50.0f64..50.0, 5..40),
            noise in proptest::collection::vec(-5.0f64..5.0, 40),
            a in 0.1f64..10.0,
            b in -100.0f64..100.0,
        ) {
            let ys: Vec<f64> = xs.iter().zip(&noise).map(|(x, e)| 0.3 * x + e).collect();
            let base = ols_simple(&xs, &ys);
            prop_assume!(base.is_ok());
            let base = base.unwrap();
            let pos: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
            let neg: Vec<f64> = xs.iter().map(|x| -a * x + b).collect();
            let fp = ols_simple(&pos, &ys).unwrap();
            let fn_ = ols_simple(&neg, &ys).unwrap();
            prop_assert!((fp.beta_std - base.beta_std).abs() < 1e-9);
            prop_assert!((fp.r2 - base.r2).abs() < 1e-9);
            prop_assert!((fn_.beta_std + base.beta_std).abs() < 1e-9);
            prop_assert!((fn_.r2 - base.r2).abs() < 1e-9);
            prop_assert!(base.r2 >= 0.0 && base.r2 <= 1.0);
            prop_assert!(base.p_value > 0.0 && base.p_value <= 1.0);
        }
    }
}
