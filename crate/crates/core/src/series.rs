//! Date-indexed series: daily means, standardization, calendar
//! interpolation and period splits.

use std::io::{Read, Write};

use chrono::{DateTime, Days, NaiveDate, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::MarketQuote;

/// Inclusive calendar interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DateRange {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl DateRange {
    pub fn new(start: NaiveDate, end: NaiveDate) -> Result<Self> {
        if end < start {
            return Err(Error::invalid(format!("empty date range {start}..={end}")));
        }
        Ok(DateRange { start, end })
    }

    pub fn len(&self) -> usize {
        (self.end - self.start).num_days() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, d: NaiveDate) -> bool {
        self.start <= d && d <= self.end
    }

    /// Zero-based offset of `d` from the start.
    pub fn offset(&self, d: NaiveDate) -> Option<usize> {
        self.contains(d).then(|| (d - self.start).num_days() as usize)
    }

    pub fn days(&self) -> impl Iterator<Item = NaiveDate> {
        self.start.iter_days().take(self.len())
    }
}

/// One finite value per consecutive calendar day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailySeries {
    pub label: String,
    pub start_date: NaiveDate,
    pub values: Vec<f64>,
}

impl DailySeries {
    pub fn new(label: impl Into<String>, start_date: NaiveDate, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("series must have at least one value"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite value at index {i}")));
        }
        Ok(DailySeries {
            label: label.into(),
            start_date,
            values,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn end_date(&self) -> NaiveDate {
        self.date_at(self.len() - 1)
    }

    pub fn date_at(&self, idx: usize) -> NaiveDate {
        self.start_date + Days::new(idx as u64)
    }

    pub fn range(&self) -> DateRange {
        DateRange {
            start: self.start_date,
            end: self.end_date(),
        }
    }

    pub fn dates(&self) -> impl Iterator<Item = NaiveDate> + '_ {
        self.start_date.iter_days().take(self.len())
    }

    pub fn relabel(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Writes the `date,value` CSV form.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["date", "value"])?;
        for (d, v) in self.dates().zip(&self.values) {
            w.write_record([d.to_string(), v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the `date,value` CSV form; dates must be consecutive.
    pub fn read_csv<R: Read>(label: impl Into<String>, reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let mut start = None;
        let mut values = Vec::new();
        for (idx, row) in rdr.records().enumerate() {
            let row = row?;
            let line = idx + 2;
            let bad = |message: String| Error::Parse {
                what: "series csv",
                line,
                message,
            };
            let date = NaiveDate::parse_from_str(row.get(0).unwrap_or(""), "%Y-%m-%d")
                .map_err(|e| bad(format!("bad date: {e}")))?;
            let value: f64 = row.get(1).unwrap_or("").parse().map_err(|_| bad("bad value".into()))?;
            let first = *start.get_or_insert(date);
            if date != first + Days::new(values.len() as u64) {
                return Err(bad(format!("date {date} breaks the daily sequence")));
            }
            values.push(value);
        }
        let start = start.ok_or_else(|| Error::invalid("series csv has no rows"))?;
        DailySeries::new(label, start, values)
    }
}

/// What [`daily_mean`] does with days that have no documents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmptyDayPolicy {
    #[default]
    Error,
    /// Interpolate linearly between the nearest non-empty days. Empty days
    /// at either end of the range remain an error.
    Linear,
}

/// Per-day arithmetic mean of scores bucketed by UTC calendar date. Scores
/// outside `range` are ignored.
pub fn daily_mean(
    label: impl Into<String>,
    scored: &[(DateTime<Utc>, f64)],
    range: DateRange,
    policy: EmptyDayPolicy,
) -> Result<DailySeries> {
    let mut buckets: Vec<Vec<f64>> = vec![Vec::new(); range.len()];
    for (ts, score) in scored {
        if let Some(i) = range.offset(ts.date_naive()) {
            buckets[i].push(*score);
        }
    }
    let means: Vec<Option<f64>> = buckets
        .into_iter()
        .map(|mut b| {
            if b.is_empty() {
                return None;
            }
            // summing in sorted order makes the mean independent of input order
            b.sort_by(f64::total_cmp);
            Some(b.iter().sum::<f64>() / b.len() as f64)
        })
        .collect();

    let missing: Vec<NaiveDate> = range
        .days()
        .zip(&means)
        .filter(|(_, m)| m.is_none())
        .map(|(d, _)| d)
        .collect();
    if missing.is_empty() {
        return DailySeries::new(label, range.start, means.into_iter().flatten().collect());
    }
    match policy {
        EmptyDayPolicy::Error => Err(Error::EmptyDays(missing)),
        EmptyDayPolicy::Linear => {
            if means[0].is_none() || means[means.len() - 1].is_none() {
                let ends = missing
                    .into_iter()
                    .filter(|d| *d == range.start || *d == range.end)
                    .collect();
                return Err(Error::EmptyDays(ends));
            }
            let anchors: Vec<(usize, f64)> = means
                .iter()
                .enumerate()
                .filter_map(|(i, m)| m.map(|v| (i, v)))
                .collect();
            DailySeries::new(label, range.start, fill_linear(&anchors, range.len()))
        }
    }
}

/// Linear interpolation over `0..len` between sorted `(index, value)`
/// anchors covering both ends.
fn fill_linear(anchors: &[(usize, f64)], len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for pair in anchors.windows(2) {
        let (i0, v0) = pair[0];
        let (i1, v1) = pair[1];
        let span = (i1 - i0) as f64;
        for (step, slot) in out[i0..i1].iter_mut().enumerate() {
            *slot = v0 + (v1 - v0) * step as f64 / span;
        }
    }
    if let Some(&(i, v)) = anchors.last() {
        out[i] = v;
    }
    out
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample (n-1) standard deviation.
pub fn sample_sd(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (xs.len() as f64 - 1.0)).sqrt()
}

/// Standardizes with the sample mean and sample standard deviation of the
/// whole series.
pub fn zscore(series: &DailySeries) -> Result<DailySeries> {
    if series.len() < 2 {
        return Err(Error::invalid("zscore needs at least two values"));
    }
    let m = mean(&series.values);
    let sd = sample_sd(&series.values);
    let scale = series.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if !(sd > scale * f64::EPSILON * 16.0) {
        return Err(Error::ZeroVariance(series.label.clone()));
    }
    let values = series.values.iter().map(|v| (v - m) / sd).collect();
    DailySeries::new(series.label.clone(), series.start_date, values)
}

/// Fills every day of `range` from market quotes: quoted days keep their
/// close, gaps get the linear interpolation between the nearest quoted
/// neighbours. Both range ends must be quoted.
pub fn interpolate_calendar(label: impl Into<String>, quotes: &[MarketQuote], range: DateRange) -> Result<DailySeries> {
    if quotes.windows(2).any(|w| w[0].date >= w[1].date) {
        return Err(Error::invalid("quotes must be sorted by date without duplicates"));
    }
    let anchors: Vec<(usize, f64)> = quotes
        .iter()
        .filter_map(|q| range.offset(q.date).map(|i| (i, q.close)))
        .collect();
    for boundary in [range.start, range.end] {
        if !quotes.iter().any(|q| q.date == boundary) {
            return Err(Error::NoAnchorQuote(boundary));
        }
    }
    DailySeries::new(label, range.start, fill_linear(&anchors, range.len()))
}

/// A series cut at `break_date`: period A holds the days before it, period
/// B the break date onward.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodSplit {
    pub period_a: DailySeries,
    pub period_b: DailySeries,
    pub break_date: NaiveDate,
}

pub fn split_periods(series: &DailySeries, break_date: NaiveDate) -> Result<PeriodSplit> {
    let range = series.range();
    let idx = match range.offset(break_date) {
        Some(i) if i > 0 => i,
        _ => {
            return Err(Error::BreakOutOfRange {
                date: break_date,
                start: range.start,
                end: range.end,
            })
        }
    };
    let (a, b) = series.values.split_at(idx);
    Ok(PeriodSplit {
        period_a: DailySeries::new(format!("{}:A", series.label), series.start_date, a.to_vec())?,
        period_b: DailySeries::new(format!("{}:B", series.label), break_date, b.to_vec())?,
        break_date,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;
    use proptest::prelude::*;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    fn at(date: NaiveDate, hour: u32) -> DateTime<Utc> {
        Utc.from_utc_datetime(&date.and_hms_opt(hour, 0, 0).unwrap())
    }

    #[test]
    fn daily_mean_examples() {
        let day = d(2020, 2, 21);
        let r = DateRange::new(day, day).unwrap();
        let s = daily_mean("x", &[(at(day, 1), 1.0), (at(day, 23), 3.0)], r, EmptyDayPolicy::Error).unwrap();
        assert_eq!(s.values, vec![2.0]);
        let s = daily_mean("x", &[(at(day, 5), 5.0)], r, EmptyDayPolicy::Error).unwrap();
        assert_eq!(s.values, vec![5.0]);
    }

    #[test]
    fn empty_day_policies() {
        let r = DateRange::new(d(2020, 1, 1), d(2020, 1, 4)).unwrap();
        let scored = [
            (at(d(2020, 1, 1), 0), 0.0),
            (at(d(2020, 1, 4), 0), 3.0),
            (at(d(2020, 1, 9), 0), 100.0),
        ];
        match daily_mean("x", &scored, r, EmptyDayPolicy::Error) {
            Err(Error::EmptyDays(days)) => assert_eq!(days, vec![d(2020, 1, 2), d(2020, 1, 3)]),
            other => panic!("unexpected {other:?}"),
        }
        let err = daily_mean("x", &scored, r, EmptyDayPolicy::Error).unwrap_err();
        assert!(err.to_string().contains("2020-01-02"));
        let filled = daily_mean("x", &scored, r, EmptyDayPolicy::Linear).unwrap();
        assert_eq!(filled.values, vec![0.0, 1.0, 2.0, 3.0]);
        let r2 = DateRange::new(d(2019, 12, 31), d(2020, 1, 4)).unwrap();
        assert!(daily_mean("x", &scored, r2, EmptyDayPolicy::Linear).is_err());
    }

    #[test]
    fn zscore_examples() {
        let s = DailySeries::new("x", d(2020, 1, 1), vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(zscore(&s).unwrap().values, vec![-1.0, 0.0, 1.0]);
        let flat = DailySeries::new("x", d(2020, 1, 1), vec![4.0; 5]).unwrap();
        assert!(zscore(&flat).unwrap_err().to_string().contains("zero variance"));
        let one = DailySeries::new("x", d(2020, 1, 1), vec![4.0]).unwrap();
        assert!(zscore(&one).is_err());
    }

    #[test]
    fn interpolation_examples() {
        // 2020-01-03 is a Friday
        let q = [
            MarketQuote {
                date: d(2020, 1, 3),
                close: 100.0,
            },
            MarketQuote {
                date: d(2020, 1, 6),
                close: 106.0,
            },
        ];
        let r = DateRange::new(d(2020, 1, 3), d(2020, 1, 6)).unwrap();
        let s = interpolate_calendar("m", &q, r).unwrap();
        assert_eq!(s.values, vec![100.0, 102.0, 104.0, 106.0]);

        let adjacent = [
            MarketQuote {
                date: d(2020, 1, 6),
                close: 1.0,
            },
            MarketQuote {
                date: d(2020, 1, 7),
                close: 2.0,
            },
        ];
        let r = DateRange::new(d(2020, 1, 6), d(2020, 1, 7)).unwrap();
        assert_eq!(interpolate_calendar("m", &adjacent, r).unwrap().values, vec![1.0, 2.0]);

        let r = DateRange::new(d(2020, 1, 4), d(2020, 1, 6)).unwrap();
        let err = interpolate_calendar("m", &q, r).unwrap_err();
        assert!(err.to_string().contains("no anchor quote"));
    }

    #[test]
    fn study_calendar_split() {
        let r = DateRange::new(d(2019, 10, 1), d(2020, 5, 31)).unwrap();
        assert_eq!(r.len(), 244);
        let s = DailySeries::new("x", r.start, (0..244).map(f64::from).collect()).unwrap();
        let split = split_periods(&s, d(2020, 2, 21)).unwrap();
        assert_eq!(split.period_a.len(), 143);
        assert_eq!(split.period_b.len(), 101);
        assert_eq!(split.period_a.end_date() + Days::new(1), split.period_b.start_date);

        assert!(split_periods(&s, r.start).is_err());
        assert!(split_periods(&s, d(2020, 6, 1)).is_err());
        let last = split_periods(&s, r.end).unwrap();
        assert_eq!(last.period_b.len(), 1);
    }

    #[test]
    fn csv_round_trip() {
        let s = DailySeries::new("x", d(2020, 2, 28), vec![0.1, -2.5, 3.0]).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("date,value\n2020-02-28,0.1\n2020-02-29,-2.5\n"));
        assert_eq!(DailySeries::read_csv("x", &buf[..]).unwrap(), s);
        assert!(DailySeries::read_csv("x", "date,value\n2020-01-01,1\n2020-01-03,2\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn zscore_moments_and_idempotence(values in proptest::collection::vec(-1e3f64..1e3, 2..80)) {
            let s = DailySeries::new("x", d(2020, 1, 1), values).unwrap();
            prop_assume!(sample_sd(&s.values) > 1e-6);
            let z = zscore(&s).unwrap();
            prop_assert!(mean(&z.values).abs() < 1e-12);
            prop_assert!((sample_sd(&z.values) - 1.0).abs() < 1e-12);
            let zz = zscore(&z).unwrap();
            for (a, b) in zz.values.iter().zip(&z.values) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn interpolation_preserves_quotes_and_bounds(
            closes in proptest::collection::vec(1.0f64..1e5, 2..20),
            gaps in proptest::collection::vec(1u64..5, 19),
        ) {
            let mut date = d(2020, 1, 1);
            let mut quotes = Vec::new();
            for (i, c) in closes.iter().enumerate() {
                quotes.push(MarketQuote { date, close: *c });
                date = date + Days::new(gaps[i % gaps.len()]);
            }
            let r = DateRange::new(quotes[0].date, quotes.last().unwrap().date).unwrap();
            let s = interpolate_calendar("m", &quotes, r).unwrap();
            for q in &quotes {
                prop_assert_eq!(s.values[r.offset(q.date).unwrap()], q.close);
            }
            for w in quotes.windows(2) {
                let (lo, hi) = (w[0].close.min(w[1].close), w[0].close.max(w[1].close));
                for day in r.offset(w[0].date).unwrap()..=r.offset(w[1].date).unwrap() {
                    prop_assert!(s.values[day] >= lo - 1e-9 && s.values[day] <= hi + 1e-9);
                }
            }
        }

        #[test]
        fn split_lengths_add_up(len in 2usize..60, cut in 1usize..60) {
            let cut = 1 + cut % (len - 1);
            let s = DailySeries::new("x", d(2020, 1, 1), vec![0.0; len]).unwrap();
            let split = split_periods(&s, s.date_at(cut)).unwrap();
            prop_assert_eq!(split.period_a.len() + split.period_b.len(), len);
        }

        #[test]
        fn daily_mean_ignores_input_order(scores in proptest::collection::vec((0u32..3, -10.0f64..10.0), 3..40), seed in any::<u64>()) {
            let r = DateRange::new(d(2020, 1, 1), d(2020, 1, 3)).unwrap();
            let mut scored: Vec<(DateTime<Utc>, f64)> = scores.iter().map(|(day, v)| (at(d(2020, 1, 1 + day), 12), *v)).collect();
            let a = daily_mean("x", &scored, r, EmptyDayPolicy::Linear);
            let mut rng = crate::synthkit::SplitMix64::new(seed);
            rng.shuffle(&mut scored);
            let b = daily_mean("x", &scored, r, EmptyDayPolicy::Linear);
            match (a, b) {
                (Ok(a), Ok(b)) => prop_assert_eq!(a, b),
                (Err(_), Err(_)) => {}
                _ => prop_assert!(false, "order changed the outcome"),
            }
        }
    }
}
