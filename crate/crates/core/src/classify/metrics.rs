use serde::Serialize;

use super::Label;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
    /// Set when a metric's denominator was zero and it was reported as 0.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub undefined: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub positive: ClassMetrics,
    pub negative: ClassMetrics,
    pub accuracy: f64,
}

impl MetricsReport {
    pub fn class(&self, label: Label) -> &ClassMetrics {
        match label {
            Label::Positive => &self.positive,
            Label::Negative => &self.negative,
        }
    }
}

fn ratio(num: usize, den: usize) -> (f64, bool) {
    if den == 0 {
        (0.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

fn class_metrics(predictions: &[Label], truth: &[Label], class: Label) -> ClassMetrics {
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for (p, t) in predictions.iter().zip(truth) {
        match (*p == class, *t == class) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    let (precision, p_undef) = ratio(tp, tp + fp);
    let (recall, r_undef) = ratio(tp, tp + fn_);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    ClassMetrics {
        precision,
        recall,
        f1,
        support: tp + fn_,
        undefined: p_undef || r_undef,
    }
}

/// Per-class precision, recall, F1 and support, plus overall accuracy.
pub fn evaluate(predictions: &[Label], truth: &[Label]) -> Result<MetricsReport> {
    if predictions.len() != truth.len() || truth.is_empty() {
        return Err(Error::invalid(
            "predictions and truth must be nonempty and the same length",
        ));
    }
    let correct = predictions.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(MetricsReport {
        positive: class_metrics(predictions, truth, Label::Positive),
        negative: class_metrics(predictions, truth, Label::Negative),
        accuracy: correct as f64 / truth.len() as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::{Negative as N, Positive as P};

    #[test]
    fn confusion_matrix_example() {
        // TP=3, FP=1, FN=1, TN=5 with positive as the class of interest
        let truth = [P, P, P, P, N, N, N, N, N, N];
        let preds = [P, P, P, N, P, N, N, N, N, N];
        let r = evaluate(&preds, &truth).unwrap();
        assert_eq!(r.positive.precision, 0.75);
        assert_eq!(r.positive.recall, 0.75);
        assert_eq!(r.positive.f1, 0.75);
        assert_eq!(r.positive.support, 4);
        assert_eq!(r.negative.support, 6);
        assert_eq!(r.accuracy, 0.8);
    }

    #[test]
    fn perfect_predictions() {
        let truth = [P, N, N, P];
        let r = evaluate(&truth, &truth).unwrap();
        for c in [&r.positive, &r.negative] {
            assert_eq!((c.precision, c.recall, c.f1), (1.0, 1.0, 1.0));
        }
        assert_eq!(r.accuracy, 1.0);
    }

    #[test]
    fn empty_denominators_flagged() {
        let r = evaluate(&[N, N], &[N, N]).unwrap();
        assert!(r.positive.undefined);
        assert_eq!(r.positive.precision, 0.0);
        assert!(!r.negative.undefined);
        assert!(evaluate(&[], &[]).is_err());
        assert!(evaluate(&[N], &[N, P]).is_err());
    }
}
