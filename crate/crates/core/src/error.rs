use std::path::PathBuf;

use chrono::NaiveDate;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{what}, line {line}: {message}")]
    Parse {
        what: &'static str,
        line: usize,
        message: String,
    },

    #[error("duplicate date {0}")]
    DuplicateDate(NaiveDate),

    #[error("non-positive close {close} on {date}")]
    NonPositiveClose { date: NaiveDate, close: f64 },

    #[error("invalid lexicon {name}: {message}")]
    InvalidLexicon { name: String, message: String },

    #[error("no documents on {}", format_dates(.0))]
    EmptyDays(Vec<NaiveDate>),

    #[error("zero variance in {0}")]
    ZeroVariance(String),

    #[error("no anchor quote on {0}")]
    NoAnchorQuote(NaiveDate),

    #[error("break date {date} is not strictly inside {start}..={end}")]
    BreakOutOfRange {
        date: NaiveDate,
        start: NaiveDate,
        end: NaiveDate,
    },

    #[error("infeasible segmentation: {m} breaks with minimum segment length {h_min} need more than {n} observations")]
    Infeasible { n: usize, m: usize, h_min: usize },

    #[error("empty vocabulary")]
    EmptyVocabulary,

    #[error("class {0} absent from training data")]
    MissingClass(String),

    #[error("all feature rows are zero")]
    DegenerateFeatures,

    #[error("lag {k}: {source}")]
    Lag {
        k: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("config: {0}")]
    Config(String),

    #[error("missing input {}", .0.display())]
    MissingPath(PathBuf),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// Whether the error stems from configuration rather than data.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::MissingPath(_))
    }
}

fn format_dates(dates: &[NaiveDate]) -> String {
    dates.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(", ")
}
