//! Left/Right/Excluded group assignment from outlet-follow sets, user
//! admission filters and per-user tweet caps.

mod registry;
mod tally;

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};

use crate::corpus::{Side, TweetRecord};
use crate::error::{Error, Result};

pub use registry::{BiasCategory, OutletEntry, OutletRegistry};
pub use tally::{stream_tally, stream_tally_parallel, FollowTally, TallyOutcome, TallySummary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Group {
    Left,
    Right,
    Excluded,
}

impl Group {
    pub fn as_str(self) -> &'static str {
        match self {
            Group::Left => "Left",
            Group::Right => "Right",
            Group::Excluded => "Excluded",
        }
    }

    pub fn side(self) -> Option<Side> {
        match self {
            Group::Left => Some(Side::Left),
            Group::Right => Some(Side::Right),
            Group::Excluded => None,
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Group {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "left" => Ok(Group::Left),
            "right" => Ok(Group::Right),
            "excluded" => Ok(Group::Excluded),
            _ => Err(Error::InvalidArgument(format!("unknown group `{s}`"))),
        }
    }
}

/// Number of distinct registry accounts followed, per bias category.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CategoryCounts(pub [u32; 5]);

impl CategoryCounts {
    pub fn get(&self, c: BiasCategory) -> u32 {
        self.0[c.index()]
    }

    pub fn add(&mut self, c: BiasCategory) {
        self.0[c.index()] += 1;
    }

    pub fn left(&self) -> u32 {
        self.get(BiasCategory::Left)
    }

    /// lean_right + right.
    pub fn right_pole(&self) -> u32 {
        self.get(BiasCategory::LeanRight) + self.get(BiasCategory::Right)
    }

    /// Categories belonging to neither pole: lean_left + center.
    pub fn other(&self) -> u32 {
        self.get(BiasCategory::LeanLeft) + self.get(BiasCategory::Center)
    }

    pub fn assign(&self) -> Group {
        let (left, right, other) = (self.left(), self.right_pole(), self.other());
        if left >= 2 && right == 0 && other == 0 {
            Group::Left
        } else if right >= 2 && left == 0 && other == 0 {
            Group::Right
        } else {
            Group::Excluded
        }
    }
}

/// `other_count` holds follows of lean_left and center accounts, which
/// disqualify both groups. Left additionally requires `right_pole_count == 0`
/// and Right requires `left_count == 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupAssignment {
    pub user_id: String,
    pub group: Group,
    pub left_count: u32,
    pub right_pole_count: u32,
    pub other_count: u32,
}

impl GroupAssignment {
    pub fn from_counts(user_id: impl Into<String>, counts: &CategoryCounts) -> Self {
        GroupAssignment {
            user_id: user_id.into(),
            group: counts.assign(),
            left_count: counts.left(),
            right_pole_count: counts.right_pole(),
            other_count: counts.other(),
        }
    }

    pub fn tsv_line(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{}",
            self.user_id, self.group, self.left_count, self.right_pole_count, self.other_count
        )
    }
}

/// Accounts absent from the registry are ignored; repeated accounts count once.
pub fn assign_group<S: AsRef<str>>(
    user_id: &str,
    follows: impl IntoIterator<Item = S>,
    registry: &OutletRegistry,
) -> GroupAssignment {
    let mut seen = HashSet::new();
    let mut counts = CategoryCounts::default();
    for acc in follows {
        if let Some(pos) = registry.position(acc.as_ref()) {
            if seen.insert(pos) {
                counts.add(registry.category_at(pos));
            }
        }
    }
    GroupAssignment::from_counts(user_id, &counts)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserProfile {
    pub user_id: String,
    pub location_us: bool,
    pub created_at: NaiveDate,
    pub tweet_count_window: u64,
    pub follows_count: u64,
    pub followers_count: u64,
    pub likes_received: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DateWindow {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl DateWindow {
    pub fn new(start: NaiveDate, end: NaiveDate) -> Result<Self> {
        if end < start {
            return Err(Error::InvalidArgument(format!("window end {end} precedes start {start}")));
        }
        Ok(DateWindow { start, end })
    }

    pub fn contains(&self, ts: &DateTime<Utc>) -> bool {
        let d = ts.date_naive();
        d >= self.start && d <= self.end
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdmissionRule {
    Location,
    AccountAge,
    TweetCount,
    Follows,
    Followers,
    LikesRatio,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdmissionRules {
    pub min_tweets: u64,
    pub min_follows: u64,
    pub min_followers: u64,
    /// Likes received per tweet must be strictly above this.
    pub min_likes_ratio: f64,
}

impl Default for AdmissionRules {
    fn default() -> Self {
        AdmissionRules {
            min_tweets: 10,
            min_follows: 10,
            min_followers: 5,
            min_likes_ratio: 0.03,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmitDecision {
    pub admitted: bool,
    pub failed_rules: Vec<AdmissionRule>,
}

pub fn admit_user(profile: &UserProfile, window: &DateWindow, rules: &AdmissionRules) -> AdmitDecision {
    let mut failed = Vec::new();
    if !profile.location_us {
        failed.push(AdmissionRule::Location);
    }
    if profile.created_at > window.start {
        failed.push(AdmissionRule::AccountAge);
    }
    if profile.tweet_count_window < rules.min_tweets {
        failed.push(AdmissionRule::TweetCount);
    }
    if profile.follows_count < rules.min_follows {
        failed.push(AdmissionRule::Follows);
    }
    if profile.followers_count < rules.min_followers {
        failed.push(AdmissionRule::Followers);
    }
    let ratio_ok = profile.tweet_count_window > 0
        && (profile.likes_received as f64 / profile.tweet_count_window as f64) > rules.min_likes_ratio;
    if !ratio_ok {
        failed.push(AdmissionRule::LikesRatio);
    }
    AdmitDecision {
        admitted: failed.is_empty(),
        failed_rules: failed,
    }
}

/// A post as ingested, before cleaning.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawTweet {
    pub tweet_id: String,
    pub user_id: String,
    pub timestamp: DateTime<Utc>,
    pub text: String,
    pub likes: u64,
    pub retweets: u64,
    pub lang_tag: String,
    pub has_media: bool,
}

impl RawTweet {
    pub fn engagement(&self) -> u64 {
        self.likes + self.retweets
    }

    pub fn from_record(rec: &TweetRecord) -> Self {
        RawTweet {
            tweet_id: rec.id.clone(),
            user_id: rec.user.clone(),
            timestamp: rec.ts,
            text: rec.text.clone(),
            likes: rec.likes,
            retweets: rec.rts,
            lang_tag: rec.lang.clone(),
            has_media: false,
        }
    }
}

/// Numeric ids compare numerically, anything else lexicographically.
pub fn id_order(a: &str, b: &str) -> Ordering {
    match (a.parse::<u128>(), b.parse::<u128>()) {
        (Ok(x), Ok(y)) => x.cmp(&y),
        _ => a.cmp(b),
    }
}

pub const DEFAULT_TWEET_CAP: usize = 700;

/// Keeps the `cap` highest-engagement tweets of one user: likes + retweets
/// descending, then longer text, then tweet id ascending.
pub fn cap_tweets(mut tweets: Vec<RawTweet>, cap: usize) -> Result<Vec<RawTweet>> {
    if cap == 0 {
        return Err(Error::InvalidArgument("tweet cap must be positive".into()));
    }
    if let Some(first) = tweets.first() {
        if let Some(other) = tweets.iter().find(|t| t.user_id != first.user_id) {
            return Err(Error::InvalidArgument(format!(
                "cap_tweets expects one user, saw `{}` and `{}`",
                first.user_id, other.user_id
            )));
        }
    }
    tweets.sort_by(|a, b| {
        b.engagement()
            .cmp(&a.engagement())
            .then_with(|| b.text.chars().count().cmp(&a.text.chars().count()))
            .then_with(|| id_order(&a.tweet_id, &b.tweet_id))
    });
    tweets.truncate(cap);
    Ok(tweets)
}
