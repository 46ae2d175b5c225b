//! Supervised polarity benchmark: document-term matrices, multinomial naive
//! Bayes, a linear soft-margin SVM, seeded train/test splits and the
//! per-class metrics report.

mod bench;
mod dtm;
mod metrics;
mod nb;
mod split;
mod svm;

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{clean_text, remove_stopwords, tokenize, StopList};

pub use bench::{run_benchmark, BenchConfig, BenchReport, ClassifierRuns};
pub use dtm::{build_dtm, DocumentTermMatrix, SparseCounts};
pub use metrics::{evaluate, ClassMetrics, MetricsReport};
pub use nb::{predict_nb, train_nb, NbModel};
pub use split::{split_train_test, split_train_test_stratified};
pub use svm::{predict_svm, svm_objective, train_svm, SparseVec, SvmModel, SvmParams};

/// Binary polarity. Variant order is the lexicographic order of the names,
/// which is what tie-breaking relies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub const BOTH: [Label; 2] = [Label::Negative, Label::Positive];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Negative => "negative",
            Label::Positive => "positive",
        }
    }

    /// `+1` for positive, `-1` for negative.
    pub fn sign(self) -> f64 {
        match self {
            Label::Negative => -1.0,
            Label::Positive => 1.0,
        }
    }

    /// Position in [`Label::BOTH`] and in per-class arrays.
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_lowercase().as_str() {
            "positive" => Ok(Label::Positive),
            "negative" => Ok(Label::Negative),
            other => Err(Error::invalid(format!("unknown label {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Period {
    A,
    B,
}

impl FromStr for Period {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "A" | "a" => Ok(Period::A),
            "B" | "b" => Ok(Period::B),
            other => Err(Error::invalid(format!("unknown period {other:?}"))),
        }
    }
}

impl fmt::Display for Period {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Period::A => "A",
            Period::B => "B",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabeledDoc {
    pub id: String,
    pub tokens: Vec<String>,
    pub label: Label,
    pub period: Period,
}

impl AsRef<[String]> for LabeledDoc {
    fn as_ref(&self) -> &[String] {
        &self.tokens
    }
}

#[derive(Debug, Deserialize, Serialize)]
struct WireLabeled {
    id: String,
    period: String,
    label: String,
    text: String,
}

/// Reads the `id,period,label,text` CSV, cleaning and tokenizing each text
/// and removing stop words and digit-only tokens.
pub fn read_labeled_docs<R: Read>(reader: R, stops: &StopList) -> Result<Vec<LabeledDoc>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut docs = Vec::new();
    for (idx, row) in rdr.deserialize::<WireLabeled>().enumerate() {
        let line = idx + 2;
        let bad = |message: String| Error::Parse {
            what: "labeled csv",
            line,
            message,
        };
        let row = row.map_err(|e| bad(e.to_string()))?;
        let label = row.label.parse().map_err(|e: Error| bad(e.to_string()))?;
        let period = row.period.parse().map_err(|e: Error| bad(e.to_string()))?;
        let tokens = remove_stopwords(&tokenize(&clean_text(&row.text)), stops, true);
        docs.push(LabeledDoc {
            id: row.id,
            tokens,
            label,
            period,
        });
    }
    Ok(docs)
}

/// Writes the `id,period,label,text` CSV with the tokens joined by spaces as
/// the text.
pub fn write_labeled_docs<W: Write>(docs: &[LabeledDoc], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for d in docs {
        w.serialize(WireLabeled {
            id: d.id.clone(),
            period: d.period.to_string(),
            label: d.label.to_string(),
            text: d.tokens.join(" "),
        })?;
    }
    w.flush()?;
    Ok(())
}
