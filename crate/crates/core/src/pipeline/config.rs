//! The TOML run configuration. Relative paths resolve against the directory
//! holding the config file.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::breaks::{DEFAULT_M_MAX, DEFAULT_TRIM_FRACTION};
use crate::classify::BenchConfig;
use crate::error::{Error, Result};
use crate::ingest::TweetFormat;
use crate::sentiment::DEFAULT_SHIFT_WINDOW;
use crate::series::{DateRange, EmptyDayPolicy};
use crate::synthkit::RegimeSchedule;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub inputs: Inputs,
    pub range: RangeConfig,
    #[serde(default)]
    pub scorers: Vec<ScorerConfig>,
    #[serde(default)]
    pub breaks: BreaksConfig,
    #[serde(default)]
    pub lagreg: LagConfig,
    #[serde(default)]
    pub periods: PeriodsConfig,
    #[serde(default)]
    pub classify: BenchConfig,
    pub simulate: Option<SimulateConfig>,
    pub output: OutputConfig,
    /// Directory relative paths resolve against; set by [`PipelineConfig::load`].
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Inputs {
    pub tweets: Option<PathBuf>,
    /// Inferred from the tweets file extension when absent.
    pub tweet_format: Option<TweetFormat>,
    pub market: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub labeled: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeConfig {
    pub start: NaiveDate,
    pub end: NaiveDate,
    #[serde(default)]
    pub empty_days: EmptyDayPolicy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreMode {
    Unigram,
    Emotion,
    Shifted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScorerConfig {
    pub name: String,
    pub mode: ScoreMode,
    pub lexicon: PathBuf,
    /// Required for `shifted`.
    pub shifters: Option<PathBuf>,
    pub window: Option<usize>,
}

impl ScorerConfig {
    pub fn window(&self) -> usize {
        self.window.unwrap_or(DEFAULT_SHIFT_WINDOW)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BreaksConfig {
    pub m_max: usize,
    pub h_min_fraction: f64,
    /// Segment the standardized sentiment series rather than the raw means.
    pub standardize: bool,
}

impl Default for BreaksConfig {
    fn default() -> Self {
        BreaksConfig {
            m_max: DEFAULT_M_MAX,
            h_min_fraction: DEFAULT_TRIM_FRACTION,
            standardize: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LagConfig {
    pub k_max: usize,
}

impl Default for LagConfig {
    fn default() -> Self {
        LagConfig { k_max: 50 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MwModeConfig {
    #[default]
    Auto,
    Exact,
    Approx,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PeriodsConfig {
    /// First day of Period B. When absent, the break date chosen most often
    /// across the sentiment series is used (earliest on ties).
    pub break_date: Option<NaiveDate>,
    pub mode: MwModeConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    /// Name of the scorer whose lexicon drives the synthetic corpus.
    pub lexicon: String,
    pub docs_per_day: usize,
    pub sentiment: RegimeSchedule,
    /// Log-level schedule of the synthetic index.
    pub market: RegimeSchedule,
    pub base_close: f64,
    pub labeled_docs: usize,
    pub flip_prob: f64,
    pub labeled_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::MissingPath(path.to_owned()),
            _ => Error::File {
                path: path.to_owned(),
                source: e,
            },
        })?;
        let mut cfg = Self::parse(&text)?;
        cfg.base_dir = path.parent().map(Path::to_owned).unwrap_or_default();
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: PipelineConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.range.end < self.range.start {
            return bad(format!(
                "range end {} precedes start {}",
                self.range.end, self.range.start
            ));
        }
        let mut names: Vec<&str> = self.scorers.iter().map(|s| s.name.as_str()).collect();
        names.sort_unstable();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return bad(format!("duplicate scorer name {:?}", w[0]));
        }
        for s in &self.scorers {
            if s.name.is_empty()
                || !s
                    .name
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
            {
                return bad(format!(
                    "scorer name {:?} must be ASCII letters, digits, '_' or '-'",
                    s.name
                ));
            }
            if s.name == "market" {
                return bad("scorer name \"market\" is reserved".into());
            }
            if s.mode == ScoreMode::Shifted && s.shifters.is_none() {
                return bad(format!(
                    "scorer {} uses mode shifted but names no shifters file",
                    s.name
                ));
            }
        }
        let c = &self.classify;
        if !(c.ratio > 0.0 && c.ratio < 1.0) {
            return bad(format!("classify.ratio must lie in (0, 1), got {}", c.ratio));
        }
        if !(c.alpha > 0.0) || !(c.c_penalty > 0.0) || c.epochs == 0 || c.min_df == 0 {
            return bad("classify: alpha and c_penalty must be positive, epochs and min_df at least 1".into());
        }
        if !(self.breaks.h_min_fraction > 0.0 && self.breaks.h_min_fraction < 0.5) {
            return bad(format!(
                "breaks.h_min_fraction must lie in (0, 0.5), got {}",
                self.breaks.h_min_fraction
            ));
        }
        if let Some(sim) = &self.simulate {
            if !self
                .scorers
                .iter()
                .any(|s| s.name == sim.lexicon && s.mode != ScoreMode::Emotion)
            {
                return bad(format!(
                    "simulate.lexicon {:?} is not a unigram or shifted scorer",
                    sim.lexicon
                ));
            }
        }
        Ok(())
    }

    pub fn date_range(&self) -> Result<DateRange> {
        DateRange::new(self.range.start, self.range.end)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_owned()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(&self.output.dir)
    }

    /// A required input path, resolved, checked to exist.
    pub fn input(&self, field: &str, p: Option<&PathBuf>) -> Result<PathBuf> {
        let p = p.ok_or_else(|| Error::Config(format!("inputs.{field} is not set")))?;
        existing(self.resolve(p))
    }

    pub fn scorer_paths(&self, s: &ScorerConfig) -> Result<(PathBuf, Option<PathBuf>)> {
        let lex = existing(self.resolve(&s.lexicon))?;
        let shifters = s.shifters.as_ref().map(|p| existing(self.resolve(p))).transpose()?;
        Ok((lex, shifters))
    }

    pub fn tweet_format(&self, path: &Path) -> TweetFormat {
        self.inputs.tweet_format.unwrap_or_else(|| {
            match path
                .extension()
                .and_then(|e| e.to_str())
                .map(str::to_ascii_lowercase)
                .as_deref()
            {
                Some("csv") => TweetFormat::Csv,
                _ => TweetFormat::Jsonl,
            }
        })
    }
}

fn existing(p: PathBuf) -> Result<PathBuf> {
    if p.exists() {
        Ok(p)
    } else {
        Err(Error::MissingPath(p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[inputs]
tweets = "t.jsonl"

[range]
start = "2020-01-01"
end = "2020-01-31"

[[scorers]]
name = "afinn"
mode = "unigram"
lexicon = "afinn.tsv"

[output]
dir = "out"
"#;

    #[test]
    fn defaults_fill_in() {
        let cfg = PipelineConfig::parse(MINIMAL).unwrap();
        assert_eq!(cfg.breaks.m_max, 5);
        assert_eq!(cfg.lagreg.k_max, 50);
        assert_eq!(cfg.classify.ratio, 0.8);
        assert_eq!(cfg.range.empty_days, EmptyDayPolicy::Error);
        assert_eq!(cfg.tweet_format(Path::new("x.CSV")), TweetFormat::Csv);
    }

    #[test]
    fn config_errors() {
        let bad_ratio = format!("{MINIMAL}\n[classify]\nratio = 1.0\n");
        assert!(matches!(PipelineConfig::parse(&bad_ratio), Err(Error::Config(_))));
        let unknown = MINIMAL.replace("[output]", "[output]\ncolour = 1");
        assert!(PipelineConfig::parse(&unknown).is_err());
        let shifted = MINIMAL.replace("\"unigram\"", "\"shifted\"");
        assert!(PipelineConfig::parse(&shifted).is_err());
        let dup = format!("{MINIMAL}\n[[scorers]]\nname = \"afinn\"\nmode = \"unigram\"\nlexicon = \"b.tsv\"\n");
        assert!(PipelineConfig::parse(&dup).is_err());
    }

    #[test]
    fn missing_files_are_config_errors() {
        let mut cfg = PipelineConfig::parse(MINIMAL).unwrap();
        cfg.base_dir = PathBuf::from("/nonexistent-dir");
        let e = cfg.scorer_paths(&cfg.scorers[0]).unwrap_err();
        assert!(e.is_config());
        assert!(e.to_string().contains("afinn.tsv"));
        assert!(cfg.input("market", None).unwrap_err().is_config());
    }
}
