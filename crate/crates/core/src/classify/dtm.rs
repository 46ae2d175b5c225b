use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};

/// `(term index, count)` pairs sorted by index, zero counts omitted.
pub type SparseCounts = Vec<(usize, u32)>;

#[derive(Debug, Clone, PartialEq)]
pub struct DocumentTermMatrix {
    /// Sorted, duplicate-free.
    pub vocab: Vec<String>,
    pub rows: Vec<SparseCounts>,
}

impl DocumentTermMatrix {
    pub fn width(&self) -> usize {
        self.vocab.len()
    }

    pub fn term_index(&self, term: &str) -> Option<usize> {
        self.vocab.binary_search_by(|v| v.as_str().cmp(term)).ok()
    }

    /// Counts of `tokens` over this vocabulary; unknown tokens are dropped.
    pub fn transform(&self, tokens: &[String]) -> SparseCounts {
        let mut counts: BTreeMap<usize, u32> = BTreeMap::new();
        for idx in tokens.iter().filter_map(|t| self.term_index(t)) {
            *counts.entry(idx).or_default() += 1;
        }
        counts.into_iter().collect()
    }

    pub fn dense_row(&self, i: usize) -> Vec<u32> {
        let mut out = vec![0; self.width()];
        for &(j, c) in &self.rows[i] {
            out[j] = c;
        }
        out
    }
}

/// Vocabulary of terms appearing in at least `min_df` documents, sorted,
/// with raw term counts per document.
pub fn build_dtm<T: AsRef<[String]>>(docs: &[T], min_df: usize) -> Result<DocumentTermMatrix> {
    if min_df == 0 {
        return Err(Error::invalid("min_df must be at least 1"));
    }
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in docs {
        let distinct: BTreeSet<&str> = doc.as_ref().iter().map(String::as_str).collect();
        for term in distinct {
            *df.entry(term).or_default() += 1;
        }
    }
    let vocab: Vec<String> = df
        .into_iter()
        .filter(|&(_, n)| n >= min_df)
        .map(|(t, _)| t.to_owned())
        .collect();
    if vocab.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    let mut dtm = DocumentTermMatrix {
        vocab,
        rows: Vec::new(),
    };
    dtm.rows = docs.iter().map(|d| dtm.transform(d.as_ref())).collect();
    Ok(dtm)
}
