//! Batch toolkit for studying the sentiment of a timestamped short-text
//! corpus against a market price series.
//!
//! The pipeline runs in stages, each in its own module:
//!
//! - [`ingest`]: tweet and market file parsing, text cleaning, tokenization.
//! - [`sentiment`]: lexicon scoring in three modes (unigram sum, emotion
//!   counts, valence-shifted polarity).
//! - [`series`]: daily means, standardization, calendar interpolation,
//!   period splits.
//! - [`breaks`]: least-squares segmentation with BIC model selection.
//! - [`stats`]: simple OLS, lag sweeps, Student-t tails, Mann-Whitney.
//! - [`classify`]: document-term matrices, naive Bayes, linear SVM, metrics.
//! - [`synthkit`]: seeded generators for regime-shift series and corpora.
//! - [`pipeline`]: configuration and the command runner behind the CLI.

pub mod breaks;
pub mod classify;
pub mod error;
pub mod ingest;
pub mod pipeline;
pub mod sentiment;
pub mod series;
pub mod stats;
pub mod synthkit;

pub use error::{Error, Result};

/// Toolkit version.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Version of the on-disk report formats (CSV headers, JSON layouts).
pub const FORMAT_VERSION: u32 = 1;
