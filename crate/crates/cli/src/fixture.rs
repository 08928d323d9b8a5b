//! Synthetic pipeline input with planted effects and their ground truth.
//!
//! Posts are bags of pseudo-words drawn from numbered topics. A planted
//! homonym appears inside one topic on the left and another on the right;
//! a control appears inside the same topic on both sides. Skewed words are
//! sprinkled at side-specific rates, sentiment words carry the planted
//! shift and `topic_skew` tilts each side towards half of the topics.

use std::collections::{BTreeSet, HashSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Duration, NaiveDate, Utc};
use lexdiv::delineate::{BiasCategory, RawTweet, UserProfile};
use lexdiv::sentiment::SentimentConfig;
use lexdiv::stats::derived_rng;
use lexdiv::textprep::{clean_text, CleanRuleSet, Lemmatizer, RuleLemmatizer};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::artifacts::write_atomic;
use crate::config::{PipelineConfig, Window};
use crate::error::{CliError, CliResult};

pub const POSITIVE_WORDS: &[&str] = &["great", "good", "love", "happy", "nice", "excellent", "wonderful", "glad"];
pub const NEGATIVE_WORDS: &[&str] = &["bad", "terrible", "hate", "awful", "sad", "horrible", "ugly", "angry"];

pub const REGISTRY_FILE: &str = "registry.tsv";
pub const FOLLOWERS_FILE: &str = "followers.tsv";
pub const PROFILES_FILE: &str = "profiles.jsonl";
pub const TWEETS_FILE: &str = "tweets.jsonl";
pub const GROUND_TRUTH_FILE: &str = "ground_truth.json";
pub const CONFIG_FILE: &str = "lexdiv.toml";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomonymSpec {
    /// Generated when unset.
    #[serde(default)]
    pub word: Option<String>,
    pub left_topic: usize,
    pub right_topic: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SkewSpec {
    #[serde(default)]
    pub word: Option<String>,
    /// Share of posts carrying the word on each side.
    pub left_rate: f64,
    pub right_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FixtureSpec {
    pub seed: u64,
    pub users_per_side: usize,
    pub tweets_per_user: usize,
    /// Users whose follows put them in no group.
    pub excluded_users: usize,
    /// Users in a group who fail admission.
    pub rejected_users: usize,
    pub min_words: usize,
    pub max_words: usize,
    pub topics: usize,
    pub topic_vocab: usize,
    pub function_words: usize,
    pub function_word_rate: f64,
    /// In [0, 1): the left side draws topics from the first half with
    /// weight 1 + skew and the second half with 1 − skew; the right mirrors.
    pub topic_skew: f64,
    pub homonyms: Vec<HomonymSpec>,
    pub controls: usize,
    /// Share of a topic's posts carrying each word planted in it.
    pub plant_rate: f64,
    pub frequency_skews: Vec<SkewSpec>,
    /// In [−1, 1]: P(positive word) is 0.5 + shift/2 on the right and
    /// 0.5 − shift/2 on the left.
    pub sentiment_shift: f64,
    /// Share of posts ending in a sentiment word.
    pub sentiment_rate: f64,
    /// Share of posts given each kind of noise: URL, mention, foreign
    /// language, media, timestamp outside the window.
    pub noise_rate: f64,
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl Default for FixtureSpec {
    fn default() -> Self {
        let w = Window::default();
        FixtureSpec {
            seed: 1,
            users_per_side: 100,
            tweets_per_user: 50,
            excluded_users: 10,
            rejected_users: 10,
            min_words: 10,
            max_words: 16,
            topics: 10,
            topic_vocab: 40,
            function_words: 20,
            function_word_rate: 0.3,
            topic_skew: 0.0,
            homonyms: vec![HomonymSpec { word: None, left_topic: 0, right_topic: 1 }],
            controls: 5,
            plant_rate: 0.3,
            frequency_skews: Vec::new(),
            sentiment_shift: 0.0,
            sentiment_rate: 0.3,
            noise_rate: 0.02,
            start: w.start,
            end: w.end,
        }
    }
}

impl FixtureSpec {
    /// No planted effect of any kind.
    pub fn null(seed: u64) -> Self {
        FixtureSpec { seed, homonyms: Vec::new(), controls: 0, ..FixtureSpec::default() }
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Config(format!("fixture spec: {m}")));
        let rate = |r: f64| (0.0..=1.0).contains(&r);
        if self.users_per_side < 2 || self.tweets_per_user == 0 {
            return bad("need at least 2 users per side and 1 post per user".into());
        }
        if self.min_words == 0 || self.min_words > self.max_words {
            return bad("word counts need 1 <= min_words <= max_words".into());
        }
        if self.topics < 2 || self.topic_vocab == 0 || self.function_words == 0 {
            return bad("need at least 2 topics and non-empty vocabularies".into());
        }
        if !(0.0..1.0).contains(&self.topic_skew) {
            return bad(format!("topic_skew {} outside [0, 1)", self.topic_skew));
        }
        if !(-1.0..=1.0).contains(&self.sentiment_shift) {
            return bad(format!("sentiment_shift {} outside [-1, 1]", self.sentiment_shift));
        }
        for (name, r) in [
            ("function_word_rate", self.function_word_rate),
            ("plant_rate", self.plant_rate),
            ("sentiment_rate", self.sentiment_rate),
            ("noise_rate", self.noise_rate),
        ] {
            if !rate(r) {
                return bad(format!("{name} {r} outside [0, 1]"));
            }
        }
        if self.noise_rate > 0.2 {
            return bad("noise_rate above 0.2 leaves too little clean data".into());
        }
        if self.end < self.start {
            return bad("end precedes start".into());
        }
        for h in &self.homonyms {
            if h.left_topic >= self.topics || h.right_topic >= self.topics {
                return bad(format!("homonym topic out of range (topics = {})", self.topics));
            }
            if h.left_topic == h.right_topic {
                return bad("a homonym needs different topics on the two sides".into());
            }
        }
        for s in &self.frequency_skews {
            if !(s.left_rate > 0.0 && s.right_rate > 0.0 && rate(s.left_rate) && rate(s.right_rate)) {
                return bad(format!("skew rates must lie in (0, 1], got {} and {}", s.left_rate, s.right_rate));
            }
        }
        let named: Vec<&String> = self
            .homonyms
            .iter()
            .filter_map(|h| h.word.as_ref())
            .chain(self.frequency_skews.iter().filter_map(|s| s.word.as_ref()))
            .collect();
        let lem = RuleLemmatizer::default();
        let mut seen = HashSet::new();
        for w in named {
            if !stable_word(w, &lem) {
                return bad(format!("planted word `{w}` does not survive cleaning and lemmatization unchanged"));
            }
            if !seen.insert(w) {
                return bad(format!("planted word `{w}` used twice"));
            }
        }
        Ok(())
    }

    fn has_effects(&self) -> bool {
        !self.homonyms.is_empty()
            || self.controls > 0
            || !self.frequency_skews.is_empty()
            || self.sentiment_shift != 0.0
            || self.topic_skew != 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedHomonym {
    pub word: String,
    pub left_topic: usize,
    pub right_topic: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedSkew {
    pub word: String,
    pub left_rate: f64,
    pub right_rate: f64,
    /// log2(right_rate / left_rate), the sign convention of the frequency report.
    pub expected_log2_fold: f64,
}

/// Empty when the spec plants nothing.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub divergent: Vec<PlantedHomonym>,
    /// Controls: same topic on both sides.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub stable: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub frequency_skews: Vec<PlantedSkew>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sentiment_shift: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topic_skew: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct FixtureOutput {
    pub dir: PathBuf,
    pub config_path: PathBuf,
    pub ground_truth: GroundTruth,
    pub left_users: Vec<String>,
    pub right_users: Vec<String>,
    /// Users whose posts must not reach the corpus.
    pub dropped_users: Vec<String>,
    pub posts: usize,
}

fn stable_word(w: &str, lem: &RuleLemmatizer) -> bool {
    !w.is_empty()
        && w.chars().all(|c| c.is_ascii_lowercase())
        && lem.lemma(w) == w
        && clean_text(w, &CleanRuleSet::default()) == w
}

/// Pronounceable consonant-vowel strings that survive the text pipeline
/// unchanged and carry no sentiment.
struct WordSource {
    used: HashSet<String>,
    lem: RuleLemmatizer,
    lexicon: HashSet<String>,
}

impl WordSource {
    fn new(reserved: impl IntoIterator<Item = String>) -> Self {
        let lexicon = SentimentConfig::vader().lexicon.into_keys().collect();
        WordSource { used: reserved.into_iter().collect(), lem: RuleLemmatizer::default(), lexicon }
    }

    fn draw(&mut self, rng: &mut ChaCha8Rng, syllables: usize) -> String {
        const C: &[u8] = b"bdfgklmnprtvz";
        const V: &[u8] = b"aeiou";
        loop {
            let mut w = String::with_capacity(syllables * 2);
            for _ in 0..syllables {
                w.push(*C.choose(rng).expect("non-empty") as char);
                w.push(*V.choose(rng).expect("non-empty") as char);
            }
            if !self.used.contains(&w) && !self.lexicon.contains(&w) && stable_word(&w, &self.lem) {
                self.used.insert(w.clone());
                return w;
            }
        }
    }
}

struct Vocabulary {
    function: Vec<String>,
    topics: Vec<Vec<String>>,
    homonyms: Vec<PlantedHomonym>,
    /// (word, topic)
    controls: Vec<(String, usize)>,
    skews: Vec<PlantedSkew>,
}

fn vocabulary(spec: &FixtureSpec) -> Vocabulary {
    let named = spec
        .homonyms
        .iter()
        .filter_map(|h| h.word.clone())
        .chain(spec.frequency_skews.iter().filter_map(|s| s.word.clone()))
        .chain(POSITIVE_WORDS.iter().chain(NEGATIVE_WORDS).map(|s| s.to_string()));
    let mut src = WordSource::new(named);
    let mut rng = derived_rng(spec.seed, 0);
    let function = (0..spec.function_words).map(|_| src.draw(&mut rng, 2)).collect();
    let topics = (0..spec.topics)
        .map(|_| (0..spec.topic_vocab).map(|_| src.draw(&mut rng, 3)).collect())
        .collect();
    let homonyms = spec
        .homonyms
        .iter()
        .map(|h| PlantedHomonym {
            word: h.word.clone().unwrap_or_else(|| src.draw(&mut rng, 3)),
            left_topic: h.left_topic,
            right_topic: h.right_topic,
        })
        .collect();
    let controls = (0..spec.controls).map(|i| (src.draw(&mut rng, 3), i % spec.topics)).collect();
    let skews = spec
        .frequency_skews
        .iter()
        .map(|s| PlantedSkew {
            word: s.word.clone().unwrap_or_else(|| src.draw(&mut rng, 3)),
            left_rate: s.left_rate,
            right_rate: s.right_rate,
            expected_log2_fold: (s.right_rate / s.left_rate).log2(),
        })
        .collect();
    Vocabulary { function, topics, homonyms, controls, skews }
}

#[derive(Clone, Copy, PartialEq)]
enum Kind {
    Left,
    Right,
    Excluded,
    Rejected,
}

struct Person {
    id: String,
    kind: Kind,
}

fn topic_weights(spec: &FixtureSpec, right: bool) -> Vec<f64> {
    let half = spec.topics / 2;
    (0..spec.topics)
        .map(|t| {
            let first = t < half;
            if first != right {
                1.0 + spec.topic_skew
            } else {
                1.0 - spec.topic_skew
            }
        })
        .collect()
}

fn post_text(spec: &FixtureSpec, vocab: &Vocabulary, right: bool, topics: &WeightedIndex<f64>, rng: &mut ChaCha8Rng) -> String {
    let topic = topics.sample(rng);
    let n = rng.random_range(spec.min_words..=spec.max_words);
    let mut words: Vec<&str> = (0..n)
        .map(|_| {
            if rng.random_bool(spec.function_word_rate) {
                vocab.function.choose(rng).expect("non-empty").as_str()
            } else {
                vocab.topics[topic].choose(rng).expect("non-empty").as_str()
            }
        })
        .collect();
    for h in &vocab.homonyms {
        let t = if right { h.right_topic } else { h.left_topic };
        if t == topic && rng.random_bool(spec.plant_rate) {
            let i = rng.random_range(0..words.len());
            words[i] = &h.word;
        }
    }
    for (w, t) in &vocab.controls {
        if *t == topic && rng.random_bool(spec.plant_rate) {
            let i = rng.random_range(0..words.len());
            words[i] = w;
        }
    }
    for s in &vocab.skews {
        let r = if right { s.right_rate } else { s.left_rate };
        if rng.random_bool(r) {
            let i = rng.random_range(0..words.len());
            words[i] = &s.word;
        }
    }
    if rng.random_bool(spec.sentiment_rate) {
        let p_pos = if right { 0.5 + spec.sentiment_shift / 2.0 } else { 0.5 - spec.sentiment_shift / 2.0 };
        let list = if rng.random_bool(p_pos.clamp(0.0, 1.0)) { POSITIVE_WORDS } else { NEGATIVE_WORDS };
        words.push(list.choose(rng).expect("non-empty"));
    }
    let mut text = words.join(" ");
    if rng.random_bool(spec.noise_rate) {
        text = format!("@user{} {text}", rng.random_range(0..1000));
    }
    if rng.random_bool(spec.noise_rate) {
        write!(text, " https://t.co/{:08x}", rng.random::<u32>()).expect("string write");
    }
    text
}

fn timestamp(spec: &FixtureSpec, rng: &mut ChaCha8Rng) -> DateTime<Utc> {
    let days = (spec.end - spec.start).num_days();
    let day = if rng.random_bool(spec.noise_rate) {
        spec.start - Duration::days(rng.random_range(1..=30))
    } else {
        spec.start + Duration::days(rng.random_range(0..=days))
    };
    day.and_hms_opt(0, 0, 0).expect("midnight").and_utc() + Duration::seconds(rng.random_range(0..86_400))
}

const LEFT_ACCOUNTS: &[&str] = &["leftwire", "leftdaily", "leftpost", "leftnews"];
const RIGHT_ACCOUNTS: &[(&str, BiasCategory)] = &[
    ("rightdaily", BiasCategory::LeanRight),
    ("rightpost", BiasCategory::LeanRight),
    ("rightwire", BiasCategory::Right),
    ("rightnews", BiasCategory::Right),
];
const OTHER_ACCOUNTS: &[(&str, BiasCategory)] =
    &[("centerwire", BiasCategory::Center), ("leanleftpost", BiasCategory::LeanLeft)];

fn registry_tsv() -> String {
    let mut s = String::from("account_id\tdisplay_name\tcategory\tfollower_count\n");
    let rows = LEFT_ACCOUNTS
        .iter()
        .map(|a| (*a, BiasCategory::Left))
        .chain(RIGHT_ACCOUNTS.iter().copied())
        .chain(OTHER_ACCOUNTS.iter().copied());
    for (i, (a, c)) in rows.enumerate() {
        writeln!(s, "{a}\t{a}\t{}\t{}", c.as_str(), 100_000 * (i + 1)).expect("string write");
    }
    s
}

fn follows(kind: Kind, i: usize, rng: &mut ChaCha8Rng) -> Vec<&'static str> {
    let right: Vec<&str> = RIGHT_ACCOUNTS.iter().map(|(a, _)| *a).collect();
    let pick = |pool: &[&'static str], rng: &mut ChaCha8Rng| -> Vec<&'static str> {
        let k = rng.random_range(2..=pool.len());
        pool.choose_multiple(rng, k).copied().collect()
    };
    match kind {
        Kind::Left => pick(LEFT_ACCOUNTS, rng),
        Kind::Right => pick(&right, rng),
        Kind::Rejected if i.is_multiple_of(2) => pick(LEFT_ACCOUNTS, rng),
        Kind::Rejected => pick(&right, rng),
        Kind::Excluded => match i % 3 {
            0 => vec![LEFT_ACCOUNTS[0], right[0]],
            1 => vec![LEFT_ACCOUNTS[0], LEFT_ACCOUNTS[1], OTHER_ACCOUNTS[0].0],
            _ => vec![right[2]],
        },
    }
}

/// Builds the fixture in memory and writes it under `dir`, together with a
/// pipeline config whose relative paths point at the generated files.
pub fn make_fixture(spec: &FixtureSpec, dir: &Path) -> CliResult<FixtureOutput> {
    spec.validate()?;
    let vocab = vocabulary(spec);
    let mut people = Vec::new();
    for (kind, n, base) in [
        (Kind::Left, spec.users_per_side, 1_000_000),
        (Kind::Right, spec.users_per_side, 2_000_000),
        (Kind::Excluded, spec.excluded_users, 3_000_000),
        (Kind::Rejected, spec.rejected_users, 4_000_000),
    ] {
        people.extend((0..n).map(|i| Person { id: (base + i).to_string(), kind }));
    }

    let mut rng = derived_rng(spec.seed, 1);
    let mut follower_lines = Vec::new();
    let mut profiles = String::new();
    for (i, p) in people.iter().enumerate() {
        for a in follows(p.kind, i, &mut rng) {
            follower_lines.push(format!("{a}\t{}", p.id));
        }
        let rejected = p.kind == Kind::Rejected;
        let profile = UserProfile {
            user_id: p.id.clone(),
            location_us: !(rejected && i % 2 == 0),
            created_at: if rejected && i % 2 == 1 { spec.start + Duration::days(1) } else { spec.start - Duration::days(400) },
            tweet_count_window: spec.tweets_per_user as u64,
            follows_count: rng.random_range(10..500),
            followers_count: 10f64.powf(rng.random_range(1.0..5.0)).round() as u64,
            likes_received: spec.tweets_per_user as u64 * rng.random_range(1..20),
        };
        profiles.push_str(&serde_json::to_string(&profile)?);
        profiles.push('\n');
    }
    follower_lines.shuffle(&mut rng);

    let weights = [topic_weights(spec, false), topic_weights(spec, true)];
    let dists = [
        WeightedIndex::new(&weights[0]).map_err(|e| CliError::Config(e.to_string()))?,
        WeightedIndex::new(&weights[1]).map_err(|e| CliError::Config(e.to_string()))?,
    ];
    let per_user: Vec<String> = people
        .par_iter()
        .enumerate()
        .map(|(u, p)| {
            let mut rng = derived_rng(spec.seed, 1_000 + u as u64);
            // excluded and rejected users write like the left side
            let right = p.kind == Kind::Right;
            let mut out = String::new();
            for k in 0..spec.tweets_per_user {
                let t = RawTweet {
                    tweet_id: (100_000_000_000u64 + (u * spec.tweets_per_user + k) as u64).to_string(),
                    user_id: p.id.clone(),
                    timestamp: timestamp(spec, &mut rng),
                    text: post_text(spec, &vocab, right, &dists[usize::from(right)], &mut rng),
                    likes: rng.random_range(0..50),
                    retweets: rng.random_range(0..10),
                    lang_tag: if rng.random_bool(spec.noise_rate) { "es".into() } else { "en".into() },
                    has_media: rng.random_bool(spec.noise_rate),
                };
                out.push_str(&serde_json::to_string(&t).expect("post serializes"));
                out.push('\n');
            }
            out
        })
        .collect();

    let truth = if spec.has_effects() {
        GroundTruth {
            divergent: vocab.homonyms.clone(),
            stable: vocab.controls.iter().map(|(w, _)| w.clone()).collect(),
            frequency_skews: vocab.skews.clone(),
            sentiment_shift: (spec.sentiment_shift != 0.0).then_some(spec.sentiment_shift),
            topic_skew: (spec.topic_skew != 0.0).then_some(spec.topic_skew),
        }
    } else {
        GroundTruth::default()
    };

    let cfg = fixture_config(spec, &truth);
    std::fs::create_dir_all(dir)?;
    write_atomic(&dir.join(REGISTRY_FILE), registry_tsv().as_bytes())?;
    let mut followers = follower_lines.join("\n");
    followers.push('\n');
    write_atomic(&dir.join(FOLLOWERS_FILE), followers.as_bytes())?;
    write_atomic(&dir.join(PROFILES_FILE), profiles.as_bytes())?;
    write_atomic(&dir.join(TWEETS_FILE), per_user.concat().as_bytes())?;
    let mut gt = serde_json::to_vec_pretty(&truth)?;
    gt.push(b'\n');
    write_atomic(&dir.join(GROUND_TRUTH_FILE), &gt)?;
    write_atomic(&dir.join(CONFIG_FILE), cfg.to_toml_string()?.as_bytes())?;

    let ids = |k: Kind| people.iter().filter(|p| p.kind == k).map(|p| p.id.clone()).collect::<Vec<_>>();
    let dropped: BTreeSet<String> = ids(Kind::Excluded).into_iter().chain(ids(Kind::Rejected)).collect();
    Ok(FixtureOutput {
        dir: dir.to_path_buf(),
        config_path: dir.join(CONFIG_FILE),
        ground_truth: truth,
        left_users: ids(Kind::Left),
        right_users: ids(Kind::Right),
        dropped_users: dropped.into_iter().collect(),
        posts: people.len() * spec.tweets_per_user,
    })
}

/// Defaults scaled to the fixture: thresholds a population of this size
/// can meet and a lighter permutation count.
pub fn fixture_config(spec: &FixtureSpec, truth: &GroundTruth) -> PipelineConfig {
    let mut cfg = PipelineConfig::default();
    cfg.paths.registry = REGISTRY_FILE.into();
    cfg.paths.followers = vec![FOLLOWERS_FILE.into()];
    cfg.paths.profiles = PROFILES_FILE.into();
    cfg.paths.tweets = TWEETS_FILE.into();
    cfg.paths.work_dir = "work".into();
    cfg.window = Window { start: spec.start, end: spec.end };
    let users = spec.users_per_side as u64;
    cfg.freq.min_users = (users / 2).clamp(2, 200);
    cfg.freq.min_either = (users / 2).clamp(2, 200);
    cfg.freq.min_total = (users * 3 / 4).clamp(3, 300);
    cfg.align.min_both = 20;
    cfg.embed.bucket_count = 100_000;
    cfg.embed.subsample = 1e-3;
    cfg.sentiment.permutations = 2_000;
    cfg.annotate.targets = truth
        .divergent
        .iter()
        .map(|h| h.word.clone())
        .chain(truth.stable.iter().cloned())
        .collect();
    cfg.seeds.annotate = spec.seed;
    cfg
}
