use chrono::{DateTime, NaiveDate, TimeZone, Utc};
use proptest::prelude::*;

use sentiscope::ingest::{
    parse_market, parse_tweets, write_market, write_tweets, MarketQuote, TweetFormat, TweetRecord,
};

fn timestamp() -> impl Strategy<Value = DateTime<Utc>> {
    (1_500_000_000i64..1_700_000_000).prop_map(|s| Utc.timestamp_opt(s, 0).unwrap())
}

fn record() -> impl Strategy<Value = TweetRecord> {
    ("[a-z0-9]{1,12}", timestamp(), "[ -~àéü\n\"#@]{0,80}").prop_map(|(id, t, text)| TweetRecord::new(id, t, text))
}

fn format() -> impl Strategy<Value = TweetFormat> {
    prop_oneof![Just(TweetFormat::Jsonl), Just(TweetFormat::Csv)]
}

proptest! {
    #[test]
    fn tweets_survive_write_then_parse(records in prop::collection::vec(record(), 0..20), fmt in format()) {
        let mut buf = Vec::new();
        write_tweets(&records, fmt, &mut buf).unwrap();
        let parsed = parse_tweets(buf.as_slice(), fmt).unwrap();
        prop_assert_eq!(parsed.skipped, 0);
        prop_assert_eq!(parsed.records, records);
    }

    #[test]
    fn market_survives_write_then_parse(start in 0u32..3000, closes in prop::collection::vec(1.0f64..1e6, 1..30)) {
        let base = NaiveDate::from_ymd_opt(2015, 1, 1).unwrap() + chrono::Days::new(start as u64);
        let quotes: Vec<MarketQuote> = closes
            .iter()
            .enumerate()
            .map(|(i, &close)| MarketQuote { date: base + chrono::Days::new(2 * i as u64), close })
            .collect();
        let mut buf = Vec::new();
        write_market(&quotes, &mut buf).unwrap();
        prop_assert_eq!(parse_market(buf.as_slice()).unwrap(), quotes);
    }
}
