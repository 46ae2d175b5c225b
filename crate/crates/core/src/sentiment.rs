//! Lexicon scoring of tokenized documents.
//!
//! Three modes are supported:
//!
//! - unigram sum: the sum of the valences of matched tokens;
//! - emotion counts: how many tokens carry each of ten emotion labels;
//! - shifted polarity: unigram valences adjusted by the negators,
//!   amplifiers and deamplifiers that precede them within a window, then
//!   divided by the square root of the token count.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{BufRead, BufReader, Read};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default number of preceding tokens inspected for shifters.
pub const DEFAULT_SHIFT_WINDOW: usize = 4;

/// Lower clamp on the amplification factor so deamplifiers never flip sign.
pub const MIN_AMPLIFICATION: f64 = 0.1;

fn lexicon_error(name: &str, message: impl Into<String>) -> Error {
    Error::InvalidLexicon {
        name: name.to_owned(),
        message: message.into(),
    }
}

/// Yields `(line_number, fields)` for every non-blank, non-comment line.
fn tsv_rows<R: Read>(reader: R) -> Result<Vec<(usize, Vec<String>)>> {
    let mut rows = Vec::new();
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        rows.push((idx + 1, trimmed.split('\t').map(|f| f.trim().to_owned()).collect()));
    }
    Ok(rows)
}

fn normalize_key(name: &str, line: usize, raw: &str) -> Result<String> {
    let key = raw.to_lowercase();
    if key.is_empty() || key.chars().any(char::is_whitespace) {
        return Err(lexicon_error(name, format!("line {line}: bad token {raw:?}")));
    }
    Ok(key)
}

/// Token to real-valued valence.
#[derive(Debug, Clone, PartialEq)]
pub struct ValenceLexicon {
    name: String,
    entries: BTreeMap<String, f64>,
}

impl ValenceLexicon {
    pub fn new<I, S>(name: impl Into<String>, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: AsRef<str>,
    {
        let name = name.into();
        let mut map = BTreeMap::new();
        for (tok, score) in entries {
            let key = normalize_key(&name, 0, tok.as_ref())?;
            if !score.is_finite() {
                return Err(lexicon_error(&name, format!("non-finite score for {key:?}")));
            }
            if map.insert(key.clone(), score).is_some() {
                return Err(lexicon_error(&name, format!("duplicate token {key:?}")));
            }
        }
        if map.is_empty() {
            return Err(lexicon_error(&name, "no entries"));
        }
        Ok(ValenceLexicon { name, entries: map })
    }

    /// Reads `token<TAB>score` rows.
    pub fn read<R: Read>(name: impl Into<String>, reader: R) -> Result<Self> {
        let name = name.into();
        let mut entries = Vec::new();
        for (line, fields) in tsv_rows(reader)? {
            if fields.len() != 2 {
                return Err(lexicon_error(&name, format!("line {line}: expected token<TAB>score")));
            }
            let score: f64 = fields[1]
                .parse()
                .map_err(|_| lexicon_error(&name, format!("line {line}: bad score {:?}", fields[1])))?;
            entries.push((normalize_key(&name, line, &fields[0])?, score));
        }
        Self::new(name, entries)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn get(&self, token: &str) -> Option<f64> {
        self.entries.get(token).copied()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.entries.contains_key(token)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in token order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), *v))
    }

    /// The same lexicon with every valence negated.
    pub fn negated(&self) -> Self {
        ValenceLexicon {
            name: format!("-{}", self.name),
            entries: self.entries.iter().map(|(k, v)| (k.clone(), -v)).collect(),
        }
    }
}

/// The eight basic emotions plus the two polarity labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Emotion {
    Anger,
    Disgust,
    Fear,
    Sadness,
    Anticipation,
    Joy,
    Surprise,
    Trust,
    Positive,
    Negative,
}

impl Emotion {
    pub const ALL: [Emotion; 10] = [
        Emotion::Anger,
        Emotion::Disgust,
        Emotion::Fear,
        Emotion::Sadness,
        Emotion::Anticipation,
        Emotion::Joy,
        Emotion::Surprise,
        Emotion::Trust,
        Emotion::Positive,
        Emotion::Negative,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Emotion::Anger => "anger",
            Emotion::Disgust => "disgust",
            Emotion::Fear => "fear",
            Emotion::Sadness => "sadness",
            Emotion::Anticipation => "anticipation",
            Emotion::Joy => "joy",
            Emotion::Surprise => "surprise",
            Emotion::Trust => "trust",
            Emotion::Positive => "positive",
            Emotion::Negative => "negative",
        }
    }

    fn index(self) -> usize {
        self as usize
    }

    fn bit(self) -> u16 {
        1 << self.index()
    }
}

impl fmt::Display for Emotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Emotion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Emotion::ALL
            .into_iter()
            .find(|e| e.as_str() == s.trim().to_lowercase())
            .ok_or_else(|| Error::invalid(format!("unknown emotion label {s:?}")))
    }
}

/// Nonempty set of emotion labels attached to one token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EmotionSet(u16);

impl EmotionSet {
    pub fn insert(&mut self, e: Emotion) {
        self.0 |= e.bit();
    }

    pub fn contains(self, e: Emotion) -> bool {
        self.0 & e.bit() != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = Emotion> {
        Emotion::ALL.into_iter().filter(move |e| self.contains(*e))
    }
}

impl FromIterator<Emotion> for EmotionSet {
    fn from_iter<T: IntoIterator<Item = Emotion>>(iter: T) -> Self {
        let mut s = EmotionSet::default();
        for e in iter {
            s.insert(e);
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmotionLexicon {
    name: String,
    entries: BTreeMap<String, EmotionSet>,
}

impl EmotionLexicon {
    pub fn new<I, S>(name: impl Into<String>, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, EmotionSet)>,
        S: AsRef<str>,
    {
        let name = name.into();
        let mut map: BTreeMap<String, EmotionSet> = BTreeMap::new();
        for (tok, set) in entries {
            let key = normalize_key(&name, 0, tok.as_ref())?;
            if set.is_empty() {
                return Err(lexicon_error(&name, format!("empty label set for {key:?}")));
            }
            let slot = map.entry(key).or_default();
            slot.0 |= set.0;
        }
        if map.is_empty() {
            return Err(lexicon_error(&name, "no entries"));
        }
        Ok(EmotionLexicon { name, entries: map })
    }

    /// Reads `token<TAB>label` rows, one per token-label pair.
    pub fn read<R: Read>(name: impl Into<String>, reader: R) -> Result<Self> {
        let name = name.into();
        let mut entries = Vec::new();
        for (line, fields) in tsv_rows(reader)? {
            if fields.len() != 2 {
                return Err(lexicon_error(&name, format!("line {line}: expected token<TAB>label")));
            }
            let label: Emotion = fields[1]
                .parse()
                .map_err(|_| lexicon_error(&name, format!("line {line}: unknown label {:?}", fields[1])))?;
            let key = normalize_key(&name, line, &fields[0])?;
            entries.push((key, std::iter::once(label).collect::<EmotionSet>()));
        }
        Self::new(name, entries)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn get(&self, token: &str) -> Option<EmotionSet> {
        self.entries.get(token).copied()
    }

    /// The same lexicon with the positive and negative labels swapped.
    pub fn negated(&self) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|(k, set)| {
                let swapped = set
                    .iter()
                    .map(|e| match e {
                        Emotion::Positive => Emotion::Negative,
                        Emotion::Negative => Emotion::Positive,
                        other => other,
                    })
                    .collect();
                (k.clone(), swapped)
            })
            .collect();
        EmotionLexicon {
            name: format!("-{}", self.name),
            entries,
        }
    }
}

/// Per-label token counts for one document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct EmotionVector {
    counts: [u32; 10],
}

impl EmotionVector {
    pub fn get(&self, e: Emotion) -> u32 {
        self.counts[e.index()]
    }

    pub fn total(&self) -> u32 {
        self.counts.iter().sum()
    }

    /// Positive minus negative count.
    pub fn polarity(&self) -> f64 {
        f64::from(self.get(Emotion::Positive)) - f64::from(self.get(Emotion::Negative))
    }

    pub fn iter(&self) -> impl Iterator<Item = (Emotion, u32)> + '_ {
        Emotion::ALL.into_iter().map(move |e| (e, self.get(e)))
    }
}

impl std::ops::Add for EmotionVector {
    type Output = EmotionVector;

    fn add(mut self, rhs: EmotionVector) -> EmotionVector {
        for (a, b) in self.counts.iter_mut().zip(rhs.counts) {
            *a += b;
        }
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShifterRole {
    Negator,
    Amplifier,
    Deamplifier,
}

impl FromStr for ShifterRole {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_lowercase().as_str() {
            "negator" => Ok(ShifterRole::Negator),
            "amplifier" => Ok(ShifterRole::Amplifier),
            "deamplifier" => Ok(ShifterRole::Deamplifier),
            other => Err(Error::invalid(format!("unknown shifter role {other:?}"))),
        }
    }
}

/// Valence shifters. The three roles are pairwise disjoint and weights lie
/// in (0, 1].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ShifterLexicon {
    negators: BTreeSet<String>,
    amplifiers: BTreeMap<String, f64>,
    deamplifiers: BTreeMap<String, f64>,
}

impl ShifterLexicon {
    pub fn new<N, A, D>(negators: N, amplifiers: A, deamplifiers: D) -> Result<Self>
    where
        N: IntoIterator<Item = String>,
        A: IntoIterator<Item = (String, f64)>,
        D: IntoIterator<Item = (String, f64)>,
    {
        let mut lex = ShifterLexicon::default();
        for n in negators {
            lex.insert(n, ShifterRole::Negator, 1.0)?;
        }
        for (t, w) in amplifiers {
            lex.insert(t, ShifterRole::Amplifier, w)?;
        }
        for (t, w) in deamplifiers {
            lex.insert(t, ShifterRole::Deamplifier, w)?;
        }
        Ok(lex)
    }

    fn insert(&mut self, token: String, role: ShifterRole, weight: f64) -> Result<()> {
        let token = normalize_key("shifters", 0, &token)?;
        if self.role(&token).is_some() {
            return Err(lexicon_error(
                "shifters",
                format!("token {token:?} listed more than once"),
            ));
        }
        if role != ShifterRole::Negator && !(weight > 0.0 && weight <= 1.0) {
            return Err(lexicon_error(
                "shifters",
                format!("weight {weight} for {token:?} outside (0, 1]"),
            ));
        }
        match role {
            ShifterRole::Negator => {
                self.negators.insert(token);
            }
            ShifterRole::Amplifier => {
                self.amplifiers.insert(token, weight);
            }
            ShifterRole::Deamplifier => {
                self.deamplifiers.insert(token, weight);
            }
        }
        Ok(())
    }

    /// Reads `token<TAB>role<TAB>weight` rows. The weight column may be
    /// omitted for negators.
    pub fn read<R: Read>(reader: R) -> Result<Self> {
        let mut lex = ShifterLexicon::default();
        for (line, fields) in tsv_rows(reader)? {
            if !(2..=3).contains(&fields.len()) {
                return Err(lexicon_error(
                    "shifters",
                    format!("line {line}: expected token<TAB>role<TAB>weight"),
                ));
            }
            let role: ShifterRole = fields[1]
                .parse()
                .map_err(|e: Error| lexicon_error("shifters", format!("line {line}: {e}")))?;
            let weight = match fields.get(2) {
                Some(w) => w
                    .parse()
                    .map_err(|_| lexicon_error("shifters", format!("line {line}: bad weight {w:?}")))?,
                None if role == ShifterRole::Negator => 1.0,
                None => return Err(lexicon_error("shifters", format!("line {line}: missing weight"))),
            };
            lex.insert(fields[0].clone(), role, weight)?;
        }
        Ok(lex)
    }

    pub fn role(&self, token: &str) -> Option<ShifterRole> {
        if self.negators.contains(token) {
            Some(ShifterRole::Negator)
        } else if self.amplifiers.contains_key(token) {
            Some(ShifterRole::Amplifier)
        } else if self.deamplifiers.contains_key(token) {
            Some(ShifterRole::Deamplifier)
        } else {
            None
        }
    }

    pub fn is_empty(&self) -> bool {
        self.negators.is_empty() && self.amplifiers.is_empty() && self.deamplifiers.is_empty()
    }
}

/// Sum of the valences of matched tokens.
pub fn score_unigram(tokens: &[String], lex: &ValenceLexicon) -> f64 {
    tokens.iter().filter_map(|t| lex.get(t)).sum()
}

pub fn score_emotions(tokens: &[String], lex: &EmotionLexicon) -> EmotionVector {
    let mut v = EmotionVector::default();
    for set in tokens.iter().filter_map(|t| lex.get(t)) {
        for e in set.iter() {
            v.counts[e.index()] += 1;
        }
    }
    v
}

/// Shifter-adjusted polarity of a single sentence (a whole tweet).
///
/// Each polarized token's valence is multiplied by `(-1)^g * max(0.1, 1 + A - D)`,
/// where `g` counts negators and `A`/`D` sum amplifier and deamplifier
/// weights among the `window` preceding tokens. Tokens that carry a valence
/// are never treated as shifters. The sum is divided by `sqrt(len)`.
pub fn score_shifted(tokens: &[String], lex: &ValenceLexicon, shifters: &ShifterLexicon, window: usize) -> f64 {
    if tokens.is_empty() {
        return 0.0;
    }
    let mut total = 0.0;
    for (i, tok) in tokens.iter().enumerate() {
        let Some(valence) = lex.get(tok) else { continue };
        let mut negations = 0usize;
        let mut amp = 0.0;
        let mut deamp = 0.0;
        for ctx in &tokens[i.saturating_sub(window)..i] {
            if lex.contains(ctx) {
                continue;
            }
            match shifters.role(ctx) {
                Some(ShifterRole::Negator) => negations += 1,
                Some(ShifterRole::Amplifier) => amp += shifters.amplifiers[ctx.as_str()],
                Some(ShifterRole::Deamplifier) => deamp += shifters.deamplifiers[ctx.as_str()],
                None => {}
            }
        }
        let sign = if negations.is_multiple_of(2) { 1.0 } else { -1.0 };
        total += valence * sign * (1.0 + amp - deamp).max(MIN_AMPLIFICATION);
    }
    total / (tokens.len() as f64).sqrt()
}
