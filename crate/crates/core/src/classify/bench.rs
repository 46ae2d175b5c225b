use serde::{Deserialize, Serialize};

use super::{
    build_dtm, evaluate, predict_nb, predict_svm, split_train_test, split_train_test_stratified, train_nb, train_svm,
    Label, LabeledDoc, MetricsReport, Period, SparseVec, SvmParams,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    /// Laplace smoothing for naive Bayes.
    pub alpha: f64,
    pub c_penalty: f64,
    pub epochs: usize,
    /// Training share of each run.
    pub ratio: f64,
    pub seed: u64,
    pub min_df: usize,
    /// Split each class separately instead of the pooled shuffle.
    pub stratified: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            alpha: 1.0,
            c_penalty: 1.0,
            epochs: 50,
            ratio: 0.8,
            seed: 1,
            min_df: 1,
            stratified: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassifierRuns {
    pub nb: MetricsReport,
    pub svm: MetricsReport,
}

/// Test-set metrics for the whole labeled set and for each period alone.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub whole: ClassifierRuns,
    #[serde(rename = "A")]
    pub period_a: ClassifierRuns,
    #[serde(rename = "B")]
    pub period_b: ClassifierRuns,
}

/// Splits `docs`, builds the document-term matrix over the run's documents,
/// trains both classifiers on the training side and scores the test side.
pub fn run_single(docs: &[&LabeledDoc], cfg: &BenchConfig) -> Result<ClassifierRuns> {
    let labels: Vec<Label> = docs.iter().map(|d| d.label).collect();
    let (train, test) = if cfg.stratified {
        split_train_test_stratified(&labels, cfg.ratio, cfg.seed)?
    } else {
        split_train_test(docs.len(), cfg.ratio, cfg.seed)?
    };
    let tokens: Vec<&[String]> = docs.iter().map(|d| d.tokens.as_slice()).collect();
    let dtm = build_dtm(&tokens, cfg.min_df)?;
    let rows = |idx: &[usize]| idx.iter().map(|&i| dtm.rows[i].clone()).collect::<Vec<_>>();
    let pick = |idx: &[usize]| idx.iter().map(|&i| labels[i]).collect::<Vec<_>>();
    let (train_rows, test_rows) = (rows(&train), rows(&test));
    let (train_y, test_y) = (pick(&train), pick(&test));

    let nb = train_nb(&train_rows, &train_y, dtm.width(), cfg.alpha)?;
    let nb_pred: Vec<Label> = test_rows.iter().map(|r| predict_nb(&nb, r).0).collect();

    let as_f64 = |r: &Vec<(usize, u32)>| -> SparseVec { r.iter().map(|&(j, c)| (j, f64::from(c))).collect() };
    let train_x: Vec<SparseVec> = train_rows.iter().map(as_f64).collect();
    let params = SvmParams {
        c_penalty: cfg.c_penalty,
        epochs: cfg.epochs,
        seed: cfg.seed,
    };
    let svm = train_svm(&train_x, &train_y, dtm.width(), params)?;
    let svm_pred: Vec<Label> = test_rows.iter().map(|r| predict_svm(&svm, &as_f64(r)).0).collect();

    Ok(ClassifierRuns {
        nb: evaluate(&nb_pred, &test_y)?,
        svm: evaluate(&svm_pred, &test_y)?,
    })
}

/// The three runs: all documents, Period A only, Period B only.
pub fn run_benchmark(docs: &[LabeledDoc], cfg: &BenchConfig) -> Result<BenchReport> {
    let run = |name: &str, subset: Vec<&LabeledDoc>| {
        log::info!("classifier run {name}: {} documents", subset.len());
        run_single(&subset, cfg).map_err(|e| Error::invalid(format!("run {name}: {e}")))
    };
    Ok(BenchReport {
        whole: run("whole", docs.iter().collect())?,
        period_a: run("A", docs.iter().filter(|d| d.period == Period::A).collect())?,
        period_b: run("B", docs.iter().filter(|d| d.period == Period::B).collect())?,
    })
}
