//! Tweet and market file parsing, text cleaning and tokenization.

use std::collections::BTreeSet;
use std::io::{BufRead, BufReader, Read, Write};
use std::str::FromStr;

use chrono::{DateTime, NaiveDate, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One timestamped document.
#[derive(Debug, Clone, PartialEq)]
pub struct TweetRecord {
    pub id: String,
    pub created_at: DateTime<Utc>,
    pub raw_text: String,
    pub clean_text: String,
    pub tokens: Vec<String>,
}

impl TweetRecord {
    /// Builds a record, cleaning and tokenizing `raw_text`.
    pub fn new(id: impl Into<String>, created_at: DateTime<Utc>, raw_text: impl Into<String>) -> Self {
        let raw_text = raw_text.into();
        let clean = clean_text(&raw_text);
        let tokens = tokenize(&clean);
        TweetRecord {
            id: id.into(),
            created_at,
            raw_text,
            clean_text: clean,
            tokens,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TweetFormat {
    Jsonl,
    Csv,
}

impl FromStr for TweetFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" | "json" => Ok(TweetFormat::Jsonl),
            "csv" => Ok(TweetFormat::Csv),
            other => Err(Error::invalid(format!("unknown tweet format {other:?}"))),
        }
    }
}

/// Output of [`parse_tweets`]: the retained records plus how many input
/// lines were dropped as malformed.
#[derive(Debug, Clone, Default)]
pub struct ParsedTweets {
    pub records: Vec<TweetRecord>,
    pub skipped: usize,
}

#[derive(Debug, Deserialize, Serialize)]
struct WireTweet {
    id: String,
    created_at: String,
    text: String,
}

fn parse_timestamp(s: &str) -> Option<DateTime<Utc>> {
    DateTime::parse_from_rfc3339(s.trim())
        .ok()
        .map(|t| t.with_timezone(&Utc))
}

fn to_record(wire: WireTweet) -> std::result::Result<TweetRecord, String> {
    let created_at = parse_timestamp(&wire.created_at).ok_or_else(|| format!("bad timestamp {:?}", wire.created_at))?;
    Ok(TweetRecord::new(wire.id, created_at, wire.text))
}

/// Parses a tweet stream. Malformed records are skipped with a warning and
/// counted; a stream that cannot be read or decoded as UTF-8 is fatal.
pub fn parse_tweets<R: Read>(reader: R, format: TweetFormat) -> Result<ParsedTweets> {
    match format {
        TweetFormat::Jsonl => parse_jsonl(reader),
        TweetFormat::Csv => parse_csv(reader),
    }
}

fn parse_jsonl<R: Read>(reader: R) -> Result<ParsedTweets> {
    let mut out = ParsedTweets::default();
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str::<WireTweet>(&line)
            .map_err(|e| e.to_string())
            .and_then(to_record);
        match parsed {
            Ok(rec) => out.records.push(rec),
            Err(msg) => {
                log::warn!("tweets line {}: skipped ({msg})", idx + 1);
                out.skipped += 1;
            }
        }
    }
    Ok(out)
}

fn parse_csv<R: Read>(reader: R) -> Result<ParsedTweets> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    for required in ["id", "created_at", "text"] {
        if !headers.iter().any(|h| h == required) {
            return Err(Error::Parse {
                what: "tweets csv",
                line: 1,
                message: format!("missing column {required:?}"),
            });
        }
    }
    let mut out = ParsedTweets::default();
    for (idx, row) in rdr.records().enumerate() {
        let row = match row {
            Ok(r) => r,
            Err(e) => match e.kind() {
                csv::ErrorKind::Io(_) | csv::ErrorKind::Utf8 { .. } => return Err(e.into()),
                _ => {
                    log::warn!("tweets record {}: skipped ({e})", idx + 1);
                    out.skipped += 1;
                    continue;
                }
            },
        };
        let parsed = row
            .deserialize::<WireTweet>(Some(&headers))
            .map_err(|e| e.to_string())
            .and_then(to_record);
        match parsed {
            Ok(rec) => out.records.push(rec),
            Err(msg) => {
                log::warn!("tweets record {}: skipped ({msg})", idx + 1);
                out.skipped += 1;
            }
        }
    }
    Ok(out)
}

fn wire(rec: &TweetRecord) -> WireTweet {
    WireTweet {
        id: rec.id.clone(),
        created_at: rec.created_at.to_rfc3339_opts(SecondsFormat::AutoSi, true),
        text: rec.raw_text.clone(),
    }
}

/// Writes records in the format [`parse_tweets`] reads back.
pub fn write_tweets<W: Write>(records: &[TweetRecord], format: TweetFormat, mut writer: W) -> Result<()> {
    match format {
        TweetFormat::Jsonl => {
            for rec in records {
                serde_json::to_writer(&mut writer, &wire(rec))?;
                writer.write_all(b"\n")?;
            }
            writer.flush()?;
        }
        TweetFormat::Csv => {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
            w.write_record(["id", "created_at", "text"])?;
            for rec in records {
                w.serialize(wire(rec))?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

const URL_PREFIXES: [&str; 3] = ["http://", "https://", "www."];

fn is_dropped_token(tok: &str) -> bool {
    tok.starts_with('@') || tok.starts_with('#') || URL_PREFIXES.iter().any(|p| tok.starts_with(p))
}

/// Characters that survive cleaning: letters and digits that are not
/// uppercase after lowercasing. Everything else counts as punctuation.
fn is_kept_char(c: char) -> bool {
    c.is_alphanumeric() && !c.is_uppercase()
}

/// Lowercases `raw`, drops URL, mention and hashtag tokens whole, turns the
/// remaining punctuation into spaces and collapses whitespace.
pub fn clean_text(raw: &str) -> String {
    let lowered = raw.to_lowercase();
    let mut out = String::with_capacity(lowered.len());
    for tok in lowered.split_whitespace().filter(|t| !is_dropped_token(t)) {
        let replaced: String = tok.chars().map(|c| if is_kept_char(c) { c } else { ' ' }).collect();
        for piece in replaced.split_whitespace() {
            if !out.is_empty() {
                out.push(' ');
            }
            out.push_str(piece);
        }
    }
    out
}

pub fn tokenize(clean: &str) -> Vec<String> {
    clean.split_whitespace().map(str::to_owned).collect()
}

/// Set of lowercase tokens removed before building document-term matrices.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StopList {
    words: BTreeSet<String>,
}

impl StopList {
    pub fn new<I, S>(words: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut set = BTreeSet::new();
        for w in words {
            let w = w.as_ref().trim();
            if w.is_empty() {
                continue;
            }
            if w.chars().any(char::is_whitespace) {
                return Err(Error::invalid(format!("stop word {w:?} contains whitespace")));
            }
            set.insert(w.to_lowercase());
        }
        Ok(StopList { words: set })
    }

    /// One token per line; blank lines are ignored.
    pub fn read<R: Read>(reader: R) -> Result<Self> {
        let lines = BufReader::new(reader).lines().collect::<std::io::Result<Vec<_>>>()?;
        Self::new(lines)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Order-preserving filter dropping stop words and, optionally, tokens made
/// only of digits.
pub fn remove_stopwords(tokens: &[String], stops: &StopList, drop_numbers: bool) -> Vec<String> {
    tokens
        .iter()
        .filter(|t| !stops.contains(t))
        .filter(|t| !(drop_numbers && t.chars().all(char::is_numeric)))
        .cloned()
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketQuote {
    pub date: NaiveDate,
    pub close: f64,
}

#[derive(Debug, Deserialize)]
struct WireQuote {
    date: String,
    close: String,
}

/// Parses a `date,close` CSV. Quotes come back sorted by date.
pub fn parse_market<R: Read>(reader: R) -> Result<Vec<MarketQuote>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["date", "close"] {
        return Err(Error::Parse {
            what: "market csv",
            line: 1,
            message: format!(
                "expected header \"date,close\", found {:?}",
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let mut quotes = Vec::new();
    for (idx, row) in rdr.deserialize::<WireQuote>().enumerate() {
        let line = idx + 2;
        let row = row.map_err(|e| Error::Parse {
            what: "market csv",
            line,
            message: e.to_string(),
        })?;
        let date = NaiveDate::parse_from_str(&row.date, "%Y-%m-%d").map_err(|e| Error::Parse {
            what: "market csv",
            line,
            message: format!("unparsable date {:?}: {e}", row.date),
        })?;
        let close: f64 = row.close.parse().map_err(|_| Error::Parse {
            what: "market csv",
            line,
            message: format!("unparsable close {:?}", row.close),
        })?;
        if !(close > 0.0) || !close.is_finite() {
            return Err(Error::NonPositiveClose { date, close });
        }
        quotes.push(MarketQuote { date, close });
    }
    quotes.sort_by_key(|q| q.date);
    if let Some(w) = quotes.windows(2).find(|w| w[0].date == w[1].date) {
        return Err(Error::DuplicateDate(w[0].date));
    }
    Ok(quotes)
}

pub fn write_market<W: Write>(quotes: &[MarketQuote], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["date", "close"])?;
    for q in quotes {
        w.write_record([q.date.to_string(), q.close.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(words: &[&str]) -> Vec<String> {
        words.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn parses_a_single_jsonl_record() {
        let input = r#"{"id":"1","created_at":"2020-02-21T10:00:00Z","text":"Italy"}"#;
        let parsed = parse_tweets(input.as_bytes(), TweetFormat::Jsonl).unwrap();
        assert_eq!(parsed.skipped, 0);
        assert_eq!(parsed.records.len(), 1);
        let rec = &parsed.records[0];
        assert_eq!(rec.id, "1");
        assert_eq!(rec.raw_text, "Italy");
        assert_eq!(rec.tokens, toks(&["italy"]));
    }

    #[test]
    fn skips_line_missing_text() {
        let input = concat!(
            r#"{"id":"1","created_at":"2020-02-21T10:00:00Z"}"#,
            "\n",
            r#"{"id":"2","created_at":"2020-02-21T11:00:00Z","text":"ok"}"#,
            "\n",
        );
        let parsed = parse_tweets(input.as_bytes(), TweetFormat::Jsonl).unwrap();
        assert_eq!(parsed.skipped, 1);
        assert_eq!(parsed.records.len(), 1);
        assert_eq!(parsed.records[0].id, "2");
    }

    #[test]
    fn skips_bad_timestamp_and_garbage() {
        let input = concat!(
            r#"{"id":"1","created_at":"yesterday","text":"a"}"#,
            "\n",
            "not json\n",
            "\n",
            r#"{"id":"3","created_at":"2020-02-21T11:00:00+01:00","text":"b"}"#,
        );
        let parsed = parse_tweets(input.as_bytes(), TweetFormat::Jsonl).unwrap();
        assert_eq!(parsed.skipped, 2);
        assert_eq!(parsed.records[0].created_at.to_rfc3339(), "2020-02-21T10:00:00+00:00");
    }

    #[test]
    fn invalid_utf8_is_fatal() {
        let bytes = b"{\"id\":\"1\",\"created_at\":\"2020-02-21T10:00:00Z\",\"text\":\"\xff\"}\n";
        assert!(parse_tweets(&bytes[..], TweetFormat::Jsonl).is_err());
        let csv = b"id,created_at,text\n1,2020-02-21T10:00:00Z,\xff\n";
        assert!(parse_tweets(&csv[..], TweetFormat::Csv).is_err());
    }

    #[test]
    fn csv_with_quoting() {
        let input = "id,created_at,text\n7,2020-02-21T10:00:00Z,\"Hello, \"\"Italy\"\"\"\n8,2020-02-21T10:00:00Z\n";
        let parsed = parse_tweets(input.as_bytes(), TweetFormat::Csv).unwrap();
        assert_eq!(parsed.records.len(), 1);
        assert_eq!(parsed.skipped, 1);
        assert_eq!(parsed.records[0].raw_text, "Hello, \"Italy\"");
        assert_eq!(parsed.records[0].clean_text, "hello italy");
    }

    #[test]
    fn cleaning_examples() {
        assert_eq!(clean_text("Lockdown in #Italy!! @user https://t.co/x"), "lockdown in");
        assert_eq!(clean_text("Italy"), "italy");
        assert_eq!(clean_text(""), "");
        assert_eq!(clean_text("covid-19 www.example.com ok"), "covid 19 ok");
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize("lockdown in italy"), toks(&["lockdown", "in", "italy"]));
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("  a   b "), toks(&["a", "b"]));
    }

    #[test]
    fn stopword_examples() {
        let stops = StopList::new(["in"]).unwrap();
        assert_eq!(
            remove_stopwords(&toks(&["lockdown", "in", "italy"]), &stops, false),
            toks(&["lockdown", "italy"])
        );
        assert!(remove_stopwords(&[], &stops, true).is_empty());
        let empty = StopList::default();
        assert_eq!(
            remove_stopwords(&toks(&["covid19", "2020"]), &empty, true),
            toks(&["covid19"])
        );
        assert_eq!(remove_stopwords(&toks(&["covid19", "2020"]), &empty, false).len(), 2);
    }

    #[test]
    fn stoplist_rejects_inner_whitespace() {
        assert!(StopList::new(["a b"]).is_err());
        let s = StopList::read("The\n\nand\n".as_bytes()).unwrap();
        assert!(s.contains("the"));
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn market_parsing() {
        let q = parse_market("date,close\n2019-10-02,21000\n2019-10-01,21478.5\n".as_bytes()).unwrap();
        assert_eq!(q[0].date, NaiveDate::from_ymd_opt(2019, 10, 1).unwrap());
        assert_eq!(q[0].close, 21478.5);
        assert_eq!(q.len(), 2);

        let dup = parse_market("date,close\n2019-10-01,1\n2019-10-01,2\n".as_bytes()).unwrap_err();
        assert!(dup.to_string().contains("duplicate date"));
        let neg = parse_market("date,close\n2019-10-01,-5\n".as_bytes()).unwrap_err();
        assert!(neg.to_string().contains("non-positive close"));
        assert!(parse_market("date,close\n10/01/2019,5\n".as_bytes()).is_err());
        assert!(parse_market("day,price\n2019-10-01,5\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn clean_text_is_idempotent(s in "\\PC{0,60}") {
            let once = clean_text(&s);
            prop_assert_eq!(clean_text(&once), once);
        }

        #[test]
        fn cleaned_tokens_have_no_markup(s in "[A-Za-z#@/:. !?é-]{0,60}") {
            for tok in tokenize(&clean_text(&s)) {
                prop_assert!(!tok.is_empty());
                prop_assert!(!tok.chars().any(|c| c.is_uppercase() || c == '#' || c == '@' || c == '/'));
            }
        }

        #[test]
        fn stopword_removal_is_an_ordered_subsequence(words in proptest::collection::vec("[a-c0-9]{1,3}", 0..20)) {
            let stops = StopList::new(["a", "bb", "c1"]).unwrap();
            let kept = remove_stopwords(&words, &stops, true);
            prop_assert!(kept.len() <= words.len());
            let mut it = words.iter();
            for k in &kept {
                prop_assert!(it.any(|w| w == k));
            }
        }
    }
}
