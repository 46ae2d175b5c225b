//! Command runner behind the CLI. Every command loads what it needs from
//! the configured inputs, writes its report family into a staging
//! directory, and moves the finished files into the output directory only
//! when the whole command succeeded.

mod config;
mod output;

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{DateTime, NaiveDate, SecondsFormat, Utc};
use serde::Serialize;

pub use config::{
    BreaksConfig, Inputs, LagConfig, MwModeConfig, OutputConfig, PeriodsConfig, PipelineConfig, RangeConfig, ScoreMode,
    ScorerConfig, SimulateConfig,
};
use output::{write_atomic, Staging};

use crate::breaks::{h_min_for, select_m_bic, write_bic_csv, write_fit_csv, SegmentationReport, SegmentationResult};
use crate::classify::{read_labeled_docs, run_benchmark, write_labeled_docs, BenchReport};
use crate::error::{Error, Result};
use crate::ingest::{parse_market, parse_tweets, write_market, write_tweets, StopList, TweetFormat, TweetRecord};
use crate::sentiment::{
    score_emotions, score_shifted, score_unigram, Emotion, EmotionLexicon, EmotionVector, ShifterLexicon,
    ValenceLexicon,
};
use crate::series::{daily_mean, interpolate_calendar, split_periods, zscore, DailySeries};
use crate::stats::{format_p, lag_sweep, mann_whitney, write_lag_csv, MwMode};
use crate::synthkit::{gen_corpus, gen_labeled_docs, gen_market};
use crate::{FORMAT_VERSION, VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Score,
    Series,
    Breaks,
    Lagreg,
    Periods,
    Classify,
    Simulate,
    All,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::Score,
        Command::Series,
        Command::Breaks,
        Command::Lagreg,
        Command::Periods,
        Command::Classify,
        Command::Simulate,
        Command::All,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Command::Score => "score",
            Command::Series => "series",
            Command::Breaks => "breaks",
            Command::Lagreg => "lagreg",
            Command::Periods => "periods",
            Command::Classify => "classify",
            Command::Simulate => "simulate",
            Command::All => "all",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown command {s:?}")))
    }
}

/// Command-line values that replace config entries.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub k_max: Option<usize>,
    pub m_max: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut PipelineConfig) {
        if let Some(out) = &self.out {
            // already relative to the working directory, not the config
            cfg.output.dir = std::path::absolute(out).unwrap_or_else(|_| out.clone());
        }
        if let Some(seed) = self.seed {
            cfg.classify.seed = seed;
        }
        if let Some(k) = self.k_max {
            cfg.lagreg.k_max = k;
        }
        if let Some(m) = self.m_max {
            cfg.breaks.m_max = m;
        }
    }
}

/// What a run wrote, relative to its target directory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub command: String,
    pub target: PathBuf,
    pub files: Vec<PathBuf>,
    pub break_date: Option<NaiveDate>,
}

enum Scorer {
    Unigram(ValenceLexicon),
    Emotion(EmotionLexicon),
    Shifted(ValenceLexicon, ShifterLexicon, usize),
}

struct NamedScorer {
    name: String,
    scorer: Scorer,
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingPath(path.to_owned()),
        _ => Error::File {
            path: path.to_owned(),
            source: e,
        },
    })
}

fn with_path<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        e @ (Error::MissingPath(_) | Error::File { .. }) => e,
        e => Error::invalid(format!("{}: {e}", path.display())),
    })
}

/// Scores per document and the daily series built from them.
struct Scored {
    created_at: Vec<DateTime<Utc>>,
    ids: Vec<String>,
    /// `(scorer, polarity per document)`.
    polarity: Vec<(String, Vec<f64>)>,
    /// `(scorer, emotion counts per document)`.
    emotions: Vec<(String, Vec<EmotionVector>)>,
}

struct SeriesSet {
    /// `(raw, standardized)` daily polarity per scorer.
    sentiment: Vec<(DailySeries, DailySeries)>,
    /// `(scorer, emotion, raw)` daily mean counts.
    emotions: Vec<(String, Emotion, DailySeries)>,
}

struct Segmented {
    series: DailySeries,
    result: SegmentationResult,
    report: SegmentationReport,
}

/// Runs `command` with an already loaded configuration.
pub fn run(command: Command, cfg: &PipelineConfig) -> Result<RunSummary> {
    if command == Command::Simulate {
        return simulate(cfg);
    }
    let mut ctx = Context::new(cfg)?;
    let out_dir = cfg.output_dir();
    let mut stage = Staging::new(&out_dir)?;
    let wants = |c: Command| command == c || command == Command::All;

    if wants(Command::Score) {
        let scored = ctx.scored()?;
        stage.write("scores.csv", |w| write_scores(scored, w))?;
    }
    if wants(Command::Series) {
        let set = ctx.series()?;
        for (raw, z) in &set.sentiment {
            stage.write(format!("series/{}.csv", raw.label), |w| raw.write_csv(w))?;
            stage.write(format!("series/{}_z.csv", raw.label), |w| z.write_csv(w))?;
        }
        for (scorer, emotion, raw) in &set.emotions {
            stage.write(format!("emotions/{scorer}/{emotion}.csv"), |w| raw.write_csv(w))?;
            match zscore(raw) {
                Ok(z) => stage.write(format!("emotions/{scorer}/{emotion}_z.csv"), |w| z.write_csv(w))?,
                Err(Error::ZeroVariance(_)) => log::warn!("{scorer}/{emotion}: constant series, no standardized file"),
                Err(e) => return Err(e),
            }
        }
        if cfg.inputs.market.is_some() {
            let market = ctx.market()?.clone();
            stage.write("series/market.csv", |w| market.write_csv(w))?;
        }
    }
    if wants(Command::Breaks) {
        for seg in ctx.segmentations()? {
            write_segmentation(&mut stage, seg)?;
        }
        if cfg.inputs.market.is_some() {
            let seg = ctx.market_segmentation()?;
            write_segmentation(&mut stage, &seg)?;
        }
    }
    if wants(Command::Lagreg) {
        let market = ctx.market()?.clone();
        let mut rows = Vec::new();
        for (_, z) in &ctx.series()?.sentiment {
            rows.extend(lag_sweep(z, &market, cfg.lagreg.k_max)?);
        }
        stage.write("lagreg.csv", |w| write_lag_csv(&rows, w))?;
    }
    let mut break_date = None;
    if wants(Command::Periods) {
        let date = ctx.break_date()?;
        break_date = Some(date);
        let rows = ctx.period_rows(date)?;
        stage.write("periods.csv", |w| write_period_rows(&rows, w))?;
    }
    if wants(Command::Classify) {
        let report = ctx.benchmark()?;
        stage.write("metrics.json", |w| write_json(&report, w))?;
    }
    if command == Command::All {
        let summary = ctx.summary(break_date)?;
        stage.write("summary.json", |w| write_json(&summary, w))?;
    }
    let files = stage.commit()?;
    Ok(RunSummary {
        command: command.to_string(),
        target: out_dir,
        files,
        break_date,
    })
}

fn write_json<T: Serialize, W: Write>(value: &T, mut w: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    Ok(())
}

fn write_segmentation(stage: &mut Staging, seg: &Segmented) -> Result<()> {
    let label = &seg.series.label;
    stage.write(format!("breaks/{label}.json"), |w| write_json(&seg.report, w))?;
    stage.write(format!("breaks/{label}_bic.csv"), |w| write_bic_csv(&seg.result, w))?;
    stage.write(format!("breaks/{label}_fit.csv"), |w| {
        write_fit_csv(&seg.series, &seg.result, w)
    })
}

fn write_scores<W: Write>(scored: &Scored, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["id".to_string(), "created_at".to_string()];
    header.extend(scored.polarity.iter().map(|(n, _)| n.clone()));
    w.write_record(&header)?;
    for i in 0..scored.ids.len() {
        let mut row = vec![
            scored.ids[i].clone(),
            scored.created_at[i].to_rfc3339_opts(SecondsFormat::AutoSi, true),
        ];
        row.extend(scored.polarity.iter().map(|(_, v)| v[i].to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
struct PeriodRow {
    series: String,
    break_date: NaiveDate,
    n_a: usize,
    n_b: usize,
    median_a: f64,
    median_b: f64,
    u_a: f64,
    u_b: f64,
    p_value: f64,
    method: &'static str,
    degenerate: bool,
}

fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn write_period_rows<W: Write>(rows: &[PeriodRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "series",
        "break_date",
        "n_a",
        "n_b",
        "median_a",
        "median_b",
        "u_a",
        "u_b",
        "p_value",
        "method",
        "degenerate",
    ])?;
    for r in rows {
        w.write_record([
            r.series.clone(),
            r.break_date.to_string(),
            r.n_a.to_string(),
            r.n_b.to_string(),
            r.median_a.to_string(),
            r.median_b.to_string(),
            r.u_a.to_string(),
            r.u_b.to_string(),
            format_p(r.p_value),
            r.method.to_string(),
            r.degenerate.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct Summary {
    toolkit_version: &'static str,
    format_version: u32,
    range: [NaiveDate; 2],
    documents: usize,
    skipped_lines: usize,
    chosen_breaks: BTreeMap<String, Vec<NaiveDate>>,
    period_break_date: Option<NaiveDate>,
}

/// Lazily loaded inputs and intermediate results shared by the stages of
/// one run.
struct Context<'a> {
    cfg: &'a PipelineConfig,
    scorers: Vec<NamedScorer>,
    skipped: usize,
    scored: Option<Scored>,
    series: Option<SeriesSet>,
    segmentations: Option<Vec<Segmented>>,
    market: Option<DailySeries>,
}

impl<'a> Context<'a> {
    fn new(cfg: &'a PipelineConfig) -> Result<Self> {
        // fail on any missing lexicon before doing work
        let scorers = cfg
            .scorers
            .iter()
            .map(|s| load_scorer(cfg, s))
            .collect::<Result<Vec<_>>>()?;
        Ok(Context {
            cfg,
            scorers,
            skipped: 0,
            scored: None,
            series: None,
            segmentations: None,
            market: None,
        })
    }

    fn tweets(&mut self) -> Result<Vec<TweetRecord>> {
        let path = self.cfg.input("tweets", self.cfg.inputs.tweets.as_ref())?;
        let parsed = with_path(&path, parse_tweets(open(&path)?, self.cfg.tweet_format(&path)))?;
        self.skipped = parsed.skipped;
        log::info!(
            "{}: {} documents, {} skipped",
            path.display(),
            parsed.records.len(),
            parsed.skipped
        );
        Ok(parsed.records)
    }

    fn scored(&mut self) -> Result<&Scored> {
        if self.scored.is_none() {
            if self.scorers.is_empty() {
                return Err(Error::Config("no scorers configured".into()));
            }
            let tweets = self.tweets()?;
            let mut polarity = Vec::new();
            let mut emotions = Vec::new();
            for s in &self.scorers {
                let values: Vec<f64> = match &s.scorer {
                    Scorer::Unigram(lex) => tweets.iter().map(|t| score_unigram(&t.tokens, lex)).collect(),
                    Scorer::Shifted(lex, shifters, window) => tweets
                        .iter()
                        .map(|t| score_shifted(&t.tokens, lex, shifters, *window))
                        .collect(),
                    Scorer::Emotion(lex) => {
                        let vecs: Vec<EmotionVector> = tweets.iter().map(|t| score_emotions(&t.tokens, lex)).collect();
                        let pol = vecs.iter().map(EmotionVector::polarity).collect();
                        emotions.push((s.name.clone(), vecs));
                        pol
                    }
                };
                polarity.push((s.name.clone(), values));
            }
            self.scored = Some(Scored {
                created_at: tweets.iter().map(|t| t.created_at).collect(),
                ids: tweets.into_iter().map(|t| t.id).collect(),
                polarity,
                emotions,
            });
        }
        Ok(self.scored.as_ref().expect("set above"))
    }

    fn series(&mut self) -> Result<&SeriesSet> {
        if self.series.is_none() {
            let range = self.cfg.date_range()?;
            let policy = self.cfg.range.empty_days;
            let scored = self.scored()?;
            let stamped = |values: &[f64]| -> Vec<(DateTime<Utc>, f64)> {
                scored.created_at.iter().copied().zip(values.iter().copied()).collect()
            };
            let mut sentiment = Vec::new();
            for (name, values) in &scored.polarity {
                let raw = daily_mean(name.clone(), &stamped(values), range, policy)?;
                let z = zscore(&raw)?;
                sentiment.push((raw, z));
            }
            let mut emotions = Vec::new();
            for (name, vecs) in &scored.emotions {
                for e in Emotion::ALL {
                    let counts: Vec<f64> = vecs.iter().map(|v| f64::from(v.get(e))).collect();
                    let raw = daily_mean(format!("{name}_{e}"), &stamped(&counts), range, policy)?;
                    emotions.push((name.clone(), e, raw));
                }
            }
            self.series = Some(SeriesSet { sentiment, emotions });
        }
        Ok(self.series.as_ref().expect("set above"))
    }

    fn segment(&self, series: DailySeries) -> Result<Segmented> {
        let b = &self.cfg.breaks;
        let h_min = h_min_for(series.len(), b.h_min_fraction);
        let result = select_m_bic(&series.values, b.m_max, h_min)
            .map_err(|e| Error::invalid(format!("{}: {e}", series.label)))?;
        let report = SegmentationReport::new(&series, &result);
        Ok(Segmented { series, result, report })
    }

    fn segmentations(&mut self) -> Result<&[Segmented]> {
        if self.segmentations.is_none() {
            let standardize = self.cfg.breaks.standardize;
            let picked: Vec<DailySeries> = self
                .series()?
                .sentiment
                .iter()
                .map(|(raw, z)| if standardize { z.clone() } else { raw.clone() })
                .collect();
            let segs = picked
                .into_iter()
                .map(|s| self.segment(s))
                .collect::<Result<Vec<_>>>()?;
            self.segmentations = Some(segs);
        }
        Ok(self.segmentations.as_deref().expect("set above"))
    }

    fn market(&mut self) -> Result<&DailySeries> {
        if self.market.is_none() {
            let path = self.cfg.input("market", self.cfg.inputs.market.as_ref())?;
            let quotes = with_path(&path, parse_market(open(&path)?))?;
            let series = interpolate_calendar("market", &quotes, self.cfg.date_range()?)?;
            self.market = Some(series);
        }
        Ok(self.market.as_ref().expect("set above"))
    }

    fn market_segmentation(&mut self) -> Result<Segmented> {
        let market = self.market()?.clone();
        self.segment(market)
    }

    /// The configured break date, or the chosen break date shared by the
    /// most sentiment series (earliest on ties).
    fn break_date(&mut self) -> Result<NaiveDate> {
        if let Some(d) = self.cfg.periods.break_date {
            return Ok(d);
        }
        let mut votes: BTreeMap<NaiveDate, usize> = BTreeMap::new();
        for seg in self.segmentations()? {
            for &d in seg.report.chosen_break_dates() {
                *votes.entry(d).or_default() += 1;
            }
        }
        let best = votes.iter().map(|(&d, &n)| (n, std::cmp::Reverse(d))).max();
        match best {
            Some((_, std::cmp::Reverse(d))) => Ok(d),
            None => Err(Error::invalid(
                "no series has a break under BIC; set periods.break_date to compare periods",
            )),
        }
    }

    fn period_rows(&mut self, date: NaiveDate) -> Result<Vec<PeriodRow>> {
        let mode = match self.cfg.periods.mode {
            MwModeConfig::Auto => MwMode::Auto,
            MwModeConfig::Exact => MwMode::Exact,
            MwModeConfig::Approx => MwMode::Approx,
        };
        let set = self.series()?;
        let all = set
            .sentiment
            .iter()
            .map(|(raw, _)| raw)
            .chain(set.emotions.iter().map(|(_, _, s)| s));
        let mut rows = Vec::new();
        for s in all {
            let split = split_periods(s, date)?;
            let (a, b) = (&split.period_a.values, &split.period_b.values);
            let mw = mann_whitney(a, b, mode)?;
            rows.push(PeriodRow {
                series: s.label.clone(),
                break_date: date,
                n_a: a.len(),
                n_b: b.len(),
                median_a: median(a),
                median_b: median(b),
                u_a: mw.u_a,
                u_b: mw.u_b,
                p_value: mw.p_value,
                method: mw.method.as_str(),
                degenerate: mw.degenerate,
            });
        }
        Ok(rows)
    }

    fn benchmark(&mut self) -> Result<BenchReport> {
        let path = self.cfg.input("labeled", self.cfg.inputs.labeled.as_ref())?;
        let stops = match &self.cfg.inputs.stopwords {
            Some(p) => {
                let p = self.cfg.input("stopwords", Some(p))?;
                with_path(&p, StopList::read(open(&p)?))?
            }
            None => StopList::default(),
        };
        let docs = with_path(&path, read_labeled_docs(open(&path)?, &stops))?;
        run_benchmark(&docs, &self.cfg.classify)
    }

    fn summary(&mut self, period_break_date: Option<NaiveDate>) -> Result<Summary> {
        let chosen_breaks = self
            .segmentations()?
            .iter()
            .map(|s| (s.series.label.clone(), s.report.chosen_break_dates().to_vec()))
            .collect();
        let documents = self.scored()?.ids.len();
        Ok(Summary {
            toolkit_version: VERSION,
            format_version: FORMAT_VERSION,
            range: [self.cfg.range.start, self.cfg.range.end],
            documents,
            skipped_lines: self.skipped,
            chosen_breaks,
            period_break_date,
        })
    }
}

fn load_scorer(cfg: &PipelineConfig, s: &ScorerConfig) -> Result<NamedScorer> {
    let (lex_path, shifter_path) = cfg.scorer_paths(s)?;
    let scorer = match s.mode {
        ScoreMode::Unigram => Scorer::Unigram(with_path(&lex_path, ValenceLexicon::read(&s.name, open(&lex_path)?))?),
        ScoreMode::Emotion => Scorer::Emotion(with_path(&lex_path, EmotionLexicon::read(&s.name, open(&lex_path)?))?),
        ScoreMode::Shifted => {
            let lex = with_path(&lex_path, ValenceLexicon::read(&s.name, open(&lex_path)?))?;
            let sp = shifter_path.ok_or_else(|| Error::Config(format!("scorer {} needs shifters", s.name)))?;
            let shifters = with_path(&sp, ShifterLexicon::read(open(&sp)?))?;
            Scorer::Shifted(lex, shifters, s.window())
        }
    };
    Ok(NamedScorer {
        name: s.name.clone(),
        scorer,
    })
}

/// Writes the synthetic tweets, market quotes and labeled documents to the
/// configured input paths.
fn simulate(cfg: &PipelineConfig) -> Result<RunSummary> {
    let sim = cfg
        .simulate
        .as_ref()
        .ok_or_else(|| Error::Config("simulate needs a [simulate] section".into()))?;
    let scorer_cfg = cfg
        .scorers
        .iter()
        .find(|s| s.name == sim.lexicon)
        .ok_or_else(|| Error::Config(format!("simulate.lexicon {:?} names no scorer", sim.lexicon)))?;
    let (lex_path, _) = cfg.scorer_paths(scorer_cfg)?;
    let lex = with_path(&lex_path, ValenceLexicon::read(&scorer_cfg.name, open(&lex_path)?))?;
    let range = cfg.date_range()?;
    let target = |field: &str, p: &Option<PathBuf>| {
        p.as_ref()
            .map(|p| cfg.resolve(p))
            .ok_or_else(|| Error::Config(format!("simulate writes inputs.{field}, which is not set")))
    };
    let tweets_path = target("tweets", &cfg.inputs.tweets)?;
    let market_path = target("market", &cfg.inputs.market)?;
    let labeled_path = target("labeled", &cfg.inputs.labeled)?;

    let docs = gen_corpus(&sim.sentiment, &lex, sim.docs_per_day, range.len(), range.start)?;
    let quotes = gen_market(range, &sim.market, sim.base_close)?;
    let labeled = gen_labeled_docs(&lex, sim.labeled_docs, sim.flip_prob, sim.labeled_seed)?;

    let format: TweetFormat = cfg.tweet_format(&tweets_path);
    write_atomic(&tweets_path, |w| write_tweets(&docs, format, w))?;
    write_atomic(&market_path, |w| write_market(&quotes, w))?;
    write_atomic(&labeled_path, |w| write_labeled_docs(&labeled, w))?;
    Ok(RunSummary {
        command: Command::Simulate.to_string(),
        target: PathBuf::new(),
        files: vec![tweets_path, market_path, labeled_path],
        break_date: None,
    })
}
