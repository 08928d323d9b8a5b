//! Lexicon-based compound sentiment, per-user and per-day aggregation, and
//! the two regressions comparing sides and follower counts.

mod regress;
mod series;
pub mod vader;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{Side, TweetRecord};
use crate::error::{Error, Result};

pub use regress::{
    popularity_regression, side_effect, Coefficient, PopularityPoint, RegressionResult, UserMean,
    DEFAULT_PERMUTATIONS,
};
pub use series::{series_tsv, side_series, Granularity, SeriesPoint, SERIES_TSV_HEADER};
pub use vader::{polarity_scores, SentimentConfig, VaderScores};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SentimentScore {
    pub compound: f64,
    /// No token carried valence; excluded from every average.
    pub all_zero: bool,
}

pub fn score_compound(text: &str, config: &SentimentConfig) -> SentimentScore {
    let s = polarity_scores(text, config);
    SentimentScore {
        compound: s.compound,
        all_zero: s.all_zero,
    }
}

/// Scores each record's sentiment channel in parallel; output order
/// matches input order.
pub fn score_corpus(records: &[TweetRecord], config: &SentimentConfig) -> Vec<SentimentScore> {
    use rayon::prelude::*;
    records
        .par_iter()
        .map(|r| score_compound(r.sentiment_text(), config))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UserSentimentProfile {
    /// `None` when every tweet was all-zero; such users are excluded.
    pub mean: Option<f64>,
    pub scored: usize,
    pub total: usize,
}

pub fn user_sentiment_profile(scores: &[SentimentScore]) -> Result<UserSentimentProfile> {
    if scores.is_empty() {
        return Err(Error::Empty("tweet list for user sentiment"));
    }
    let kept: Vec<f64> = scores.iter().filter(|s| !s.all_zero).map(|s| s.compound).collect();
    Ok(UserSentimentProfile {
        mean: crate::stats::mean(&kept),
        scored: kept.len(),
        total: scores.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserAggregate {
    pub user: String,
    pub side: Side,
    pub profile: UserSentimentProfile,
}

impl UserAggregate {
    /// Input row for `side_effect`, weighted by scored tweets.
    pub fn user_mean(&self) -> Option<UserMean> {
        self.profile.mean.map(|m| UserMean {
            side: self.side,
            mean: m,
            weight: self.profile.scored as f64,
        })
    }
}

/// Groups scores by user (sorted by user id). A user appearing on both
/// sides is an error.
pub fn aggregate_users(records: &[TweetRecord], scores: &[SentimentScore]) -> Result<Vec<UserAggregate>> {
    if records.len() != scores.len() {
        return Err(Error::InvalidArgument("records and scores differ in length".into()));
    }
    let mut by_user: BTreeMap<&str, (Side, Vec<SentimentScore>)> = BTreeMap::new();
    for (r, s) in records.iter().zip(scores) {
        let entry = by_user.entry(&r.user).or_insert_with(|| (r.side, Vec::new()));
        if entry.0 != r.side {
            return Err(Error::InvalidArgument(format!("user {} appears on both sides", r.user)));
        }
        entry.1.push(*s);
    }
    by_user
        .into_iter()
        .map(|(user, (side, s))| {
            Ok(UserAggregate {
                user: user.to_string(),
                side,
                profile: user_sentiment_profile(&s)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sc(c: f64, z: bool) -> SentimentScore {
        SentimentScore {
            compound: c,
            all_zero: z,
        }
    }

    #[test]
    fn profile_examples() {
        let p = user_sentiment_profile(&[sc(0.5, false), sc(-0.5, false)]).unwrap();
        assert_eq!(p.mean, Some(0.0));
        let p = user_sentiment_profile(&[sc(0.6, false), sc(0.0, true)]).unwrap();
        assert_eq!(p.mean, Some(0.6));
        assert_eq!((p.scored, p.total), (1, 2));
        let p = user_sentiment_profile(&[sc(0.0, true)]).unwrap();
        assert_eq!(p.mean, None);
        assert!(user_sentiment_profile(&[]).is_err());
    }

    #[test]
    fn no_lexicon_hits_is_all_zero() {
        let cfg = SentimentConfig::vader();
        let s = score_compound("the of and", &cfg);
        assert_eq!(s.compound, 0.0);
        assert!(s.all_zero);
    }

    #[test]
    fn mini_lexicon_scores_offline() {
        let cfg = SentimentConfig::mini();
        assert_eq!(cfg.lexicon.len(), 200);
        let full = SentimentConfig::vader();
        let a = score_compound("This is great!", &cfg).compound;
        let b = score_compound("This is great!", &full).compound;
        assert_eq!(a, b);
    }
}
