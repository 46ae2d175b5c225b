use super::{Label, SparseCounts};
use crate::error::{Error, Result};

/// Multinomial naive Bayes over term counts.
#[derive(Debug, Clone, PartialEq)]
pub struct NbModel {
    /// `log P(C_k)`, indexed by `Label::index`.
    pub class_log_priors: [f64; 2],
    /// `log P(x_j | C_k)` per class per term.
    pub feature_log_likelihoods: [Vec<f64>; 2],
    /// Raw term counts per class.
    pub term_counts: [Vec<f64>; 2],
    pub smoothing_alpha: f64,
}

impl NbModel {
    /// `P(x_j | C_k)` straight from the counts, without a log round trip.
    pub fn likelihood(&self, label: Label, j: usize) -> f64 {
        let counts = &self.term_counts[label.index()];
        let total: f64 = counts.iter().sum();
        (counts[j] + self.smoothing_alpha) / (total + self.smoothing_alpha * counts.len() as f64)
    }
}

/// `P(x_j | C_k) = (n_kj + alpha) / (n_k + alpha * |V|)`; priors are the
/// class document proportions.
pub fn train_nb(rows: &[SparseCounts], labels: &[Label], width: usize, alpha: f64) -> Result<NbModel> {
    if rows.len() != labels.len() {
        return Err(Error::invalid("rows and labels differ in length"));
    }
    if !(alpha > 0.0) {
        return Err(Error::invalid(format!("smoothing alpha must be positive, got {alpha}")));
    }
    if width == 0 {
        return Err(Error::EmptyVocabulary);
    }
    let mut docs = [0usize; 2];
    let mut term_counts = [vec![0.0f64; width], vec![0.0f64; width]];
    for (row, label) in rows.iter().zip(labels) {
        let k = label.index();
        docs[k] += 1;
        for &(j, c) in row {
            term_counts[k][j] += f64::from(c);
        }
    }
    for label in Label::BOTH {
        if docs[label.index()] == 0 {
            return Err(Error::MissingClass(label.to_string()));
        }
    }
    let n = rows.len() as f64;
    let class_log_priors = [(docs[0] as f64 / n).ln(), (docs[1] as f64 / n).ln()];
    let feature_log_likelihoods = term_counts.clone().map(|counts| {
        let total: f64 = counts.iter().sum();
        let denom = (total + alpha * width as f64).ln();
        counts.iter().map(|c| (c + alpha).ln() - denom).collect()
    });
    Ok(NbModel {
        class_log_priors,
        feature_log_likelihoods,
        term_counts,
        smoothing_alpha: alpha,
    })
}

/// Class with the largest unnormalized log posterior, and both log
/// posteriors. Exact ties go to the negative class.
pub fn predict_nb(model: &NbModel, counts: &SparseCounts) -> (Label, [f64; 2]) {
    let mut scores = model.class_log_priors;
    for (k, score) in scores.iter_mut().enumerate() {
        let ll = &model.feature_log_likelihoods[k];
        for &(j, c) in counts {
            if let Some(l) = ll.get(j) {
                *score += f64::from(c) * l;
            }
        }
    }
    let label = if scores[Label::Positive.index()] > scores[Label::Negative.index()] {
        Label::Positive
    } else {
        Label::Negative
    };
    (label, scores)
}
