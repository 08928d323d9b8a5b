//! Per-lexeme tweet frequencies, user coverage, eligibility filters and the
//! log2 fold-change between the two subcorpora.
//!
//! Two counters are kept side by side: token occurrences feed the
//! eligibility thresholds, tweet-level presence feeds the rates and the fold
//! score.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::{Side, TweetRecord};
use crate::error::{Error, Result};

/// Tweets containing `lexeme` at least once, and that count per million
/// tweets of the subcorpus.
pub fn tweet_frequency<S: AsRef<str>>(lexeme: &str, subcorpus: &[Vec<S>]) -> Result<(u64, f64)> {
    if subcorpus.is_empty() {
        return Err(Error::Empty("subcorpus"));
    }
    let count = subcorpus
        .iter()
        .filter(|tweet| tweet.iter().any(|t| t.as_ref() == lexeme))
        .count() as u64;
    Ok((count, per_million(count, subcorpus.len() as u64)))
}

pub fn per_million(count: u64, total: u64) -> f64 {
    if total == 0 {
        0.0
    } else {
        1e6 * count as f64 / total as f64
    }
}

/// log2(right_rate / left_rate); positive means more frequent on the right.
pub fn log2_fold(lexeme: &str, left_rate: f64, right_rate: f64) -> Result<f64> {
    if !(left_rate > 0.0 && right_rate > 0.0) {
        return Err(Error::ZeroRate(lexeme.to_string()));
    }
    // the larger rate always goes in the numerator, so swapping sides
    // negates the score bit-for-bit
    if right_rate >= left_rate {
        Ok((right_rate / left_rate).log2())
    } else {
        Ok(-(left_rate / right_rate).log2())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexemeCounts {
    pub tokens: [u64; 2],
    pub tweets: [u64; 2],
    pub users: [u64; 2],
    pub users_total: u64,
}

impl LexemeCounts {
    pub fn total_tokens(&self) -> u64 {
        self.tokens[0] + self.tokens[1]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LexemeStats {
    pub lexeme: String,
    pub tweets_left: u64,
    pub tweets_right: u64,
    pub rate_left: f64,
    pub rate_right: f64,
    pub users_total: u64,
    pub users_left: u64,
    pub users_right: u64,
    pub user_share: f64,
    pub log2_fold: Option<f64>,
}

/// Counts over a lemmatized corpus.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FrequencyTable {
    pub lexemes: BTreeMap<String, LexemeCounts>,
    pub total_tweets: [u64; 2],
    pub total_users: [u64; 2],
    pub users_overall: u64,
}

impl FrequencyTable {
    pub fn build(records: &[TweetRecord]) -> Self {
        let mut user_ids: HashMap<&str, u32> = HashMap::new();
        let mut side_users: [Vec<u32>; 2] = [Vec::new(), Vec::new()];
        let mut acc: HashMap<&str, (LexemeCounts, [Vec<u32>; 2])> = HashMap::new();
        let mut total_tweets = [0u64; 2];

        for rec in records {
            let s = rec.side.index();
            total_tweets[s] += 1;
            let next = user_ids.len() as u32;
            let uid = *user_ids.entry(rec.user.as_str()).or_insert(next);
            side_users[s].push(uid);
            let mut seen: Vec<&str> = Vec::with_capacity(rec.lemmas().len());
            for lemma in rec.lemmas() {
                let entry = acc.entry(lemma.as_str()).or_default();
                entry.0.tokens[s] += 1;
                if !seen.contains(&lemma.as_str()) {
                    seen.push(lemma.as_str());
                    entry.0.tweets[s] += 1;
                    entry.1[s].push(uid);
                }
            }
        }

        let mut lexemes = BTreeMap::new();
        for (lex, (mut counts, mut users)) in acc {
            for u in users.iter_mut() {
                u.sort_unstable();
                u.dedup();
            }
            counts.users = [users[0].len() as u64, users[1].len() as u64];
            counts.users_total = sorted_union_len(&users[0], &users[1]);
            lexemes.insert(lex.to_string(), counts);
        }
        for u in side_users.iter_mut() {
            u.sort_unstable();
            u.dedup();
        }
        FrequencyTable {
            lexemes,
            total_tweets,
            total_users: [side_users[0].len() as u64, side_users[1].len() as u64],
            users_overall: sorted_union_len(&side_users[0], &side_users[1]),
        }
    }

    pub fn rate(&self, counts: &LexemeCounts, side: Side) -> f64 {
        per_million(counts.tweets[side.index()], self.total_tweets[side.index()])
    }

    pub fn stats(&self, lexeme: &str) -> Option<LexemeStats> {
        let c = self.lexemes.get(lexeme)?;
        let rate_left = self.rate(c, Side::Left);
        let rate_right = self.rate(c, Side::Right);
        Some(LexemeStats {
            lexeme: lexeme.to_string(),
            tweets_left: c.tweets[0],
            tweets_right: c.tweets[1],
            rate_left,
            rate_right,
            users_total: c.users_total,
            users_left: c.users[0],
            users_right: c.users[1],
            user_share: if self.users_overall == 0 {
                0.0
            } else {
                c.users_total as f64 / self.users_overall as f64
            },
            log2_fold: log2_fold(lexeme, rate_left, rate_right).ok(),
        })
    }

    /// Stats for the given lexemes, sorted by |log2 fold| descending, then
    /// lexeme ascending. Lexemes without a defined fold sort last.
    pub fn report<S: AsRef<str>>(&self, lexemes: &[S]) -> Vec<LexemeStats> {
        let mut rows: Vec<LexemeStats> = lexemes.iter().filter_map(|l| self.stats(l.as_ref())).collect();
        rows.sort_by(|a, b| {
            let fa = a.log2_fold.map(f64::abs).unwrap_or(f64::NEG_INFINITY);
            let fb = b.log2_fold.map(f64::abs).unwrap_or(f64::NEG_INFINITY);
            fb.total_cmp(&fa).then_with(|| a.lexeme.cmp(&b.lexeme))
        });
        rows
    }

    /// Same table with left and right exchanged.
    pub fn swapped(&self) -> Self {
        let mut out = self.clone();
        out.total_tweets.swap(0, 1);
        out.total_users.swap(0, 1);
        for c in out.lexemes.values_mut() {
            c.tokens.swap(0, 1);
            c.tweets.swap(0, 1);
            c.users.swap(0, 1);
        }
        out
    }
}

fn sorted_union_len(a: &[u32], b: &[u32]) -> u64 {
    let (mut i, mut j, mut n) = (0, 0, 0u64);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
        n += 1;
    }
    n + (a.len() - i) as u64 + (b.len() - j) as u64
}

pub const STATS_TSV_HEADER: &str = "lexeme\ttweets_l\ttweets_r\trate_l\trate_r\tlog2_fold\tusers_total\tuser_share";

pub fn stats_tsv(rows: &[LexemeStats]) -> String {
    let mut out = String::from(STATS_TSV_HEADER);
    out.push('\n');
    for r in rows {
        let fold = r.log2_fold.map(|f| format!("{f:.6}")).unwrap_or_else(|| "NA".into());
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{:.3}\t{:.3}\t{}\t{}\t{:.6}",
            r.lexeme, r.tweets_left, r.tweets_right, r.rate_left, r.rate_right, fold, r.users_total, r.user_share
        );
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ProfileName {
    Freq,
    Embed,
}

/// Thresholds are on token counts, not tweet counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EligibilityProfile {
    pub name: ProfileName,
    pub min_either: u64,
    pub min_total: u64,
    pub min_users: u64,
    /// Distinct users of the lexeme divided by its total token count.
    pub min_user_token_ratio: f64,
    pub min_both: u64,
}

impl EligibilityProfile {
    pub fn freq() -> Self {
        EligibilityProfile {
            name: ProfileName::Freq,
            min_either: 200,
            min_total: 300,
            min_users: 200,
            min_user_token_ratio: 0.05,
            min_both: 0,
        }
    }

    pub fn embed() -> Self {
        EligibilityProfile {
            name: ProfileName::Embed,
            min_either: 0,
            min_total: 0,
            min_users: 0,
            min_user_token_ratio: 0.0,
            min_both: 100,
        }
    }

    pub fn admits(&self, c: &LexemeCounts) -> bool {
        let total = c.total_tokens();
        match self.name {
            ProfileName::Freq => {
                (c.tokens[0] >= self.min_either || c.tokens[1] >= self.min_either)
                    && total >= self.min_total
                    && c.users_total >= self.min_users
                    && total > 0
                    && c.users_total as f64 / total as f64 >= self.min_user_token_ratio
            }
            ProfileName::Embed => c.tokens[0] >= self.min_both && c.tokens[1] >= self.min_both,
        }
    }
}

/// Lexemes passing the profile, sorted lexicographically.
pub fn eligible_lexicon(table: &FrequencyTable, profile: &EligibilityProfile) -> Vec<String> {
    // BTreeMap iteration is already sorted
    table
        .lexemes
        .iter()
        .filter(|(_, c)| profile.admits(c))
        .map(|(l, _)| l.clone())
        .collect()
}
