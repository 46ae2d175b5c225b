use serde::{Deserialize, Serialize};

use super::Label;
use crate::error::{Error, Result};
use crate::synthkit::SplitMix64;

/// `(feature index, value)` pairs.
pub type SparseVec = Vec<(usize, f64)>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    /// Weight of the summed hinge losses against `||w||^2 / 2`.
    pub c_penalty: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c_penalty: 1.0,
            epochs: 50,
            seed: 0,
        }
    }
}

/// Linear classifier `sign(w . x + b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub w: Vec<f64>,
    pub b: f64,
    pub c_penalty: f64,
}

fn dot(w: &[f64], x: &SparseVec) -> f64 {
    x.iter().map(|&(j, v)| w.get(j).copied().unwrap_or(0.0) * v).sum()
}

impl SvmModel {
    pub fn decision(&self, x: &SparseVec) -> f64 {
        dot(&self.w, x) + self.b
    }

    /// Slack `xi_i = max(0, 1 - y_i (w . x_i + b))` of each training point.
    pub fn hinge_losses(&self, xs: &[SparseVec], ys: &[Label]) -> Vec<f64> {
        xs.iter()
            .zip(ys)
            .map(|(x, y)| (1.0 - y.sign() * self.decision(x)).max(0.0))
            .collect()
    }

    /// The same hyperplane with `(w, b)` multiplied by `c`.
    pub fn scaled(&self, c: f64) -> SvmModel {
        SvmModel {
            w: self.w.iter().map(|v| v * c).collect(),
            b: self.b * c,
            c_penalty: self.c_penalty,
        }
    }
}

/// `||w||^2 / 2 + C * sum_i hinge(y_i (w . x_i + b))`.
pub fn svm_objective(model: &SvmModel, xs: &[SparseVec], ys: &[Label]) -> f64 {
    let reg: f64 = model.w.iter().map(|v| v * v).sum::<f64>() / 2.0;
    reg + model.c_penalty * model.hinge_losses(xs, ys).iter().sum::<f64>()
}

/// Label from the sign of the margin; a zero margin is negative.
pub fn predict_svm(model: &SvmModel, x: &SparseVec) -> (Label, f64) {
    let margin = model.decision(x);
    let label = if margin > 0.0 { Label::Positive } else { Label::Negative };
    (label, margin)
}

/// Weight vector stored as `scale * v` so the per-step shrink is O(1).
struct ScaledWeights {
    v: Vec<f64>,
    scale: f64,
    norm_sq: f64,
}

impl ScaledWeights {
    fn new(dim: usize) -> Self {
        ScaledWeights {
            v: vec![0.0; dim],
            scale: 1.0,
            norm_sq: 0.0,
        }
    }

    fn dot(&self, x: &SparseVec) -> f64 {
        self.scale * dot(&self.v, x)
    }

    fn shrink(&mut self, factor: f64) {
        if factor == 0.0 {
            self.v.iter_mut().for_each(|v| *v = 0.0);
            self.scale = 1.0;
            self.norm_sq = 0.0;
        } else {
            self.scale *= factor;
        }
        if self.scale < 1e-9 {
            self.renormalize();
        }
    }

    fn add(&mut self, coef: f64, x: &SparseVec) {
        let c = coef / self.scale;
        for &(j, val) in x {
            let d = c * val;
            self.norm_sq += 2.0 * self.v[j] * d + d * d;
            self.v[j] += d;
        }
    }

    fn norm(&self) -> f64 {
        self.scale * self.norm_sq.max(0.0).sqrt()
    }

    fn renormalize(&mut self) {
        for v in &mut self.v {
            *v *= self.scale;
        }
        self.scale = 1.0;
        self.norm_sq = self.v.iter().map(|v| v * v).sum();
    }

    fn to_vec(&self) -> Vec<f64> {
        self.v.iter().map(|v| v * self.scale).collect()
    }
}

/// Bias minimizing the summed hinge losses for fixed `w`. Each loss is
/// piecewise linear in `b` with one kink, and the total slope rises by one
/// at every kink starting from minus the number of positives, so the
/// minimum lies between the `P`-th and `P+1`-th smallest kinks. Returns
/// the midpoint of that interval.
fn best_bias(w: &[f64], xs: &[SparseVec], ys: &[Label]) -> f64 {
    let mut kinks: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| y.sign() - dot(w, x)).collect();
    kinks.sort_by(f64::total_cmp);
    let p = ys.iter().filter(|&&y| y == Label::Positive).count();
    match (p, kinks.len()) {
        (0, _) => kinks[0] - 1.0,
        (p, n) if p == n => kinks[n - 1] + 1.0,
        (p, _) => 0.5 * (kinks[p - 1] + kinks[p]),
    }
}

/// Dual of the soft-margin problem solved by sequential minimal
/// optimization with second-order working-set selection. Returns the primal
/// weights; the caller sets the bias.
fn smo_weights(xs: &[SparseVec], ys: &[Label], dim: usize, c: f64) -> Vec<f64> {
    const EPS: f64 = 1e-8;
    const TAU: f64 = 1e-12;
    let n = xs.len();
    let y: Vec<f64> = ys.iter().map(|l| l.sign()).collect();
    let sq: Vec<f64> = xs.iter().map(|x| x.iter().map(|&(_, v)| v * v).sum()).collect();
    let mut alpha = vec![0.0; n];
    let mut w = vec![0.0; dim];
    let mut dense = vec![0.0; dim];
    let max_iter = (100 * n).max(100_000);
    for _ in 0..max_iter {
        // gradient of the dual objective: G_t = y_t w.x_t - 1
        let grad: Vec<f64> = (0..n).map(|t| y[t] * dot(&w, &xs[t]) - 1.0).collect();
        let up = |t: usize| (y[t] > 0.0 && alpha[t] < c) || (y[t] < 0.0 && alpha[t] > 0.0);
        let low = |t: usize| (y[t] < 0.0 && alpha[t] < c) || (y[t] > 0.0 && alpha[t] > 0.0);
        let Some(i) = (0..n)
            .filter(|&t| up(t))
            .max_by(|&a, &b| (-y[a] * grad[a]).total_cmp(&(-y[b] * grad[b])))
        else {
            break;
        };
        let gmax = -y[i] * grad[i];
        let gmin = (0..n)
            .filter(|&t| low(t))
            .map(|t| -y[t] * grad[t])
            .fold(f64::INFINITY, f64::min);
        if gmax - gmin < EPS {
            break;
        }
        for &(k, v) in &xs[i] {
            dense[k] = v;
        }
        let mut best: Option<(usize, f64, f64)> = None;
        for t in (0..n).filter(|&t| low(t)) {
            let b_it = gmax + y[t] * grad[t];
            if b_it <= 0.0 {
                continue;
            }
            let k_it: f64 = xs[t].iter().map(|&(k, v)| dense[k] * v).sum();
            let a_it = (sq[i] + sq[t] - 2.0 * k_it).max(TAU);
            let gain = -b_it * b_it / a_it;
            if best.is_none_or(|(_, g, _)| gain < g) {
                best = Some((t, gain, a_it));
            }
        }
        for &(k, _) in &xs[i] {
            dense[k] = 0.0;
        }
        let Some((j, _, a_ij)) = best else {
            break;
        };
        // move alpha_i by y_i d and alpha_j by -y_j d
        let b_ij = gmax + y[j] * grad[j];
        let lim_i = if y[i] > 0.0 { c - alpha[i] } else { alpha[i] };
        let lim_j = if y[j] > 0.0 { alpha[j] } else { c - alpha[j] };
        let d = (b_ij / a_ij).min(lim_i).min(lim_j);
        if !(d > 0.0) {
            break;
        }
        alpha[i] = (alpha[i] + y[i] * d).clamp(0.0, c);
        alpha[j] = (alpha[j] - y[j] * d).clamp(0.0, c);
        for &(k, v) in &xs[i] {
            w[k] += d * v;
        }
        for &(k, v) in &xs[j] {
            w[k] -= d * v;
        }
    }
    w
}

/// Soft-margin linear SVM trained by seeded stochastic subgradient descent
/// on `lambda/2 ||w||^2 + mean hinge`, `lambda = 1 / (C n)`, with step
/// `1 / (lambda t)` and projection onto `||w|| <= 1 / sqrt(lambda)`.
///
/// The bias is unregularized. At the end of every epoch the bias is reset to
/// its exact minimizer for the current weights, and the current iterate and
/// the running average of the later epochs' iterates are scored on the full
/// objective. The best one seen is compared with the solution of the dual
/// problem by sequential minimal optimization, which is far more accurate
/// for large `C`, and the lower objective wins. Training is a pure function
/// of the data and `params`.
pub fn train_svm(xs: &[SparseVec], ys: &[Label], dim: usize, params: SvmParams) -> Result<SvmModel> {
    if xs.len() != ys.len() {
        return Err(Error::invalid("rows and labels differ in length"));
    }
    if !(params.c_penalty > 0.0) || !params.c_penalty.is_finite() {
        return Err(Error::invalid(format!(
            "c_penalty must be positive, got {}",
            params.c_penalty
        )));
    }
    if params.epochs == 0 {
        return Err(Error::invalid("epochs must be at least 1"));
    }
    for label in Label::BOTH {
        if !ys.contains(&label) {
            return Err(Error::MissingClass(label.to_string()));
        }
    }
    if xs.iter().all(|x| x.iter().all(|&(_, v)| v == 0.0)) {
        return Err(Error::DegenerateFeatures);
    }
    if let Some(&(j, _)) = xs.iter().flatten().find(|&&(j, v)| j >= dim || !v.is_finite()) {
        return Err(Error::invalid(format!(
            "feature {j} outside dimension {dim} or non-finite"
        )));
    }

    let n = xs.len();
    let lambda = 1.0 / (params.c_penalty * n as f64);
    let radius = 1.0 / lambda.sqrt();
    let mut rng = SplitMix64::new(params.seed);
    let mut w = ScaledWeights::new(dim);
    let mut b = 0.0;
    let mut order: Vec<usize> = (0..n).collect();

    let mut best = SvmModel {
        w: vec![0.0; dim],
        b: 0.0,
        c_penalty: params.c_penalty,
    };
    let mut best_obj = svm_objective(&best, xs, ys);
    let mut avg_w = vec![0.0; dim];
    let mut averaged = 0usize;
    let average_from = params.epochs / 2;

    let mut t = 0u64;
    for epoch in 0..params.epochs {
        rng.shuffle(&mut order);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let y = ys[i].sign();
            let margin = y * (w.dot(&xs[i]) + b);
            w.shrink(1.0 - 1.0 / t as f64);
            if margin < 1.0 {
                w.add(eta * y, &xs[i]);
            }
            let norm = w.norm();
            if norm > radius {
                w.shrink(radius / norm);
            }
        }
        w.renormalize();
        let wv = w.to_vec();
        b = best_bias(&wv, xs, ys);
        let current = SvmModel {
            w: wv,
            b,
            c_penalty: params.c_penalty,
        };
        let obj = svm_objective(&current, xs, ys);
        if obj < best_obj {
            best_obj = obj;
            best = current.clone();
        }
        if epoch >= average_from {
            averaged += 1;
            let k = averaged as f64;
            for (a, c) in avg_w.iter_mut().zip(&current.w) {
                *a += (c - *a) / k;
            }
            let avg = SvmModel {
                b: best_bias(&avg_w, xs, ys),
                w: avg_w.clone(),
                c_penalty: params.c_penalty,
            };
            let obj = svm_objective(&avg, xs, ys);
            if obj < best_obj {
                best_obj = obj;
                best = avg;
            }
        }
    }
    let w = smo_weights(xs, ys, dim, params.c_penalty);
    let refined = SvmModel {
        b: best_bias(&w, xs, ys),
        w,
        c_penalty: params.c_penalty,
    };
    if svm_objective(&refined, xs, ys) < best_obj {
        best = refined;
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::{Negative as N, Positive as P};

    fn pts(coords: &[(f64, f64)]) -> Vec<SparseVec> {
        coords.iter().map(|&(a, b)| vec![(0, a), (1, b)]).collect()
    }

    #[test]
    fn symmetric_one_dimensional_pair() {
        let xs = vec![vec![(0, -1.0)], vec![(0, 1.0)]];
        let ys = [N, P];
        let params = SvmParams {
            c_penalty: 100.0,
            epochs: 2000,
            seed: 1,
        };
        let m = train_svm(&xs, &ys, 1, params).unwrap();
        assert!((m.w[0] - 1.0).abs() < 0.02, "w = {}", m.w[0]);
        assert!(m.b.abs() < 0.02, "b = {}", m.b);
        let (label, margin) = predict_svm(&m, &vec![(0, 3.0)]);
        assert_eq!(label, P);
        assert!((margin - 3.0).abs() < 0.1);
    }

    #[test]
    fn zero_margin_is_negative_and_scaling_keeps_labels() {
        let m = SvmModel {
            w: vec![1.0, -2.0],
            b: 0.5,
            c_penalty: 1.0,
        };
        assert_eq!(predict_svm(&m, &vec![(0, 1.5), (1, 1.0)]), (N, 0.0));
        let x = vec![(0, 3.0), (1, 0.2)];
        assert_eq!(predict_svm(&m, &x).0, predict_svm(&m.scaled(7.5), &x).0);
        assert_eq!(predict_svm(&m, &vec![(0, 3.0)]).1, 3.5);
    }

    #[test]
    fn deterministic_given_seed() {
        let xs = pts(&[(0.0, 1.0), (1.0, 0.0), (2.0, 2.0), (-1.0, -1.0)]);
        let ys = [P, N, P, N];
        let p = SvmParams {
            c_penalty: 1.0,
            epochs: 30,
            seed: 5,
        };
        assert_eq!(train_svm(&xs, &ys, 2, p).unwrap(), train_svm(&xs, &ys, 2, p).unwrap());
    }

    #[test]
    fn non_separable_pair_has_slack() {
        // identical points with opposite labels cannot both be satisfied
        let xs = pts(&[(1.0, 1.0), (1.0, 1.0), (-1.0, 0.0)]);
        let ys = [P, N, N];
        let m = train_svm(
            &xs,
            &ys,
            2,
            SvmParams {
                c_penalty: 0.01,
                epochs: 200,
                seed: 2,
            },
        )
        .unwrap();
        let slack: f64 = m.hinge_losses(&xs, &ys).iter().sum();
        assert!(slack > 0.0);
        let preds: Vec<Label> = xs.iter().map(|x| predict_svm(&m, x).0).collect();
        assert!(preds.iter().zip(&ys).filter(|(p, y)| p == y).count() < 3);
    }

    #[test]
    fn input_validation() {
        let xs = pts(&[(1.0, 0.0), (0.0, 1.0)]);
        assert!(matches!(
            train_svm(&xs, &[P, P], 2, SvmParams::default()),
            Err(Error::MissingClass(_))
        ));
        let zeros = pts(&[(0.0, 0.0), (0.0, 0.0)]);
        assert!(matches!(
            train_svm(&zeros, &[P, N], 2, SvmParams::default()),
            Err(Error::DegenerateFeatures)
        ));
        let bad = SvmParams {
            c_penalty: 0.0,
            ..SvmParams::default()
        };
        assert!(train_svm(&xs, &[P, N], 2, bad).is_err());
        let none = SvmParams {
            epochs: 0,
            ..SvmParams::default()
        };
        assert!(train_svm(&xs, &[P, N], 2, none).is_err());
        assert!(train_svm(&xs, &[P, N], 1, SvmParams::default()).is_err());
    }
}
