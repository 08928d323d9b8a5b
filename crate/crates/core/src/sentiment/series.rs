use std::collections::BTreeMap;

use chrono::{DateTime, Datelike, Days, NaiveDate, Utc};
use serde::{Deserialize, Serialize};

use super::SentimentScore;
use crate::corpus::Side;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    Daily,
    /// ISO weeks starting Monday.
    Weekly,
}

impl std::str::FromStr for Granularity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "daily" | "day" => Ok(Granularity::Daily),
            "weekly" | "week" => Ok(Granularity::Weekly),
            other => Err(Error::InvalidArgument(format!("unknown granularity `{other}`"))),
        }
    }
}

impl Granularity {
    pub fn bucket(self, ts: DateTime<Utc>) -> NaiveDate {
        let d = ts.date_naive();
        match self {
            Granularity::Daily => d,
            Granularity::Weekly => d - Days::new(d.weekday().num_days_from_monday() as u64),
        }
    }

    fn step(self) -> Days {
        match self {
            Granularity::Daily => Days::new(1),
            Granularity::Weekly => Days::new(7),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub bucket_start: NaiveDate,
    pub side: Side,
    /// `None` marks a bucket without scored tweets.
    pub mean: Option<f64>,
    pub n: usize,
}

/// Every bucket between the first and last observation appears once per
/// side, ordered by bucket then side.
pub fn side_series(items: &[(DateTime<Utc>, Side, SentimentScore)], granularity: Granularity) -> Vec<SeriesPoint> {
    let mut acc: BTreeMap<(NaiveDate, Side), (f64, usize)> = BTreeMap::new();
    let mut range: Option<(NaiveDate, NaiveDate)> = None;
    for (ts, side, score) in items {
        let b = granularity.bucket(*ts);
        range = Some(match range {
            None => (b, b),
            Some((lo, hi)) => (lo.min(b), hi.max(b)),
        });
        if score.all_zero {
            continue;
        }
        let e = acc.entry((b, *side)).or_insert((0.0, 0));
        e.0 += score.compound;
        e.1 += 1;
    }
    let Some((lo, hi)) = range else {
        return Vec::new();
    };
    let mut out = Vec::new();
    let mut b = lo;
    while b <= hi {
        for side in [Side::Left, Side::Right] {
            let (sum, n) = acc.get(&(b, side)).copied().unwrap_or((0.0, 0));
            out.push(SeriesPoint {
                bucket_start: b,
                side,
                mean: (n > 0).then(|| sum / n as f64),
                n,
            });
        }
        b = b + granularity.step();
    }
    out
}

pub const SERIES_TSV_HEADER: &str = "bucket_start\tside\tmean\tn";

/// Missing buckets print `NA` in the mean column.
pub fn series_tsv(points: &[SeriesPoint]) -> String {
    let mut s = String::from(SERIES_TSV_HEADER);
    s.push('\n');
    for p in points {
        let mean = p.mean.map_or_else(|| "NA".to_string(), |m| format!("{m:.6}"));
        s.push_str(&format!("{}\t{}\t{}\t{}\n", p.bucket_start, p.side, mean, p.n));
    }
    s
}
