use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};

use lexdiv::corpus::{Side, TweetRecord};
use lexdiv::delineate::{admit_user, cap_tweets, id_order, stream_tally, Group, OutletRegistry, RawTweet, UserProfile};
use lexdiv::lexstats::{eligible_lexicon, stats_tsv, FrequencyTable};
use lexdiv::textprep::{corpus_stats, tokenize, CorpusStats};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::{files, jsonl_bytes, json_bytes, preprocessor, read_clean, read_corpus};
use crate::artifacts::{Manifest, Stage};
use crate::config::PipelineConfig;
use crate::error::{CliError, CliResult};

pub const ASSIGNMENTS_HEADER: &str = "user_id\tgroup\tleft_count\tright_pole_count\tother_count";

fn read_jsonl_lines<T: serde::de::DeserializeOwned>(path: &std::path::Path, what: &str) -> CliResult<Vec<T>> {
    let f = File::open(path)?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| {
            CliError::Runtime(format!("{}:{}: malformed {what}: {e}", path.display(), i + 1))
        })?);
    }
    Ok(out)
}

/// Follower tally → groups; admission filters; window, media and volume
/// cap on the admitted users' posts.
pub fn delineate(cfg: &PipelineConfig) -> CliResult<Manifest> {
    let mut stage = Stage::begin(cfg, "delineate", None);
    let registry = OutletRegistry::load(&stage.input("outlet registry", &cfg.paths.registry)?)?;
    let mut readers = Vec::new();
    for p in &cfg.paths.followers {
        readers.push(BufReader::new(File::open(stage.input("follower listing", p)?)?));
    }
    let profiles_path = stage.input("user profiles", &cfg.paths.profiles)?;
    let tweets_path = stage.input("raw posts", &cfg.paths.tweets)?;

    let tally = stream_tally(readers, &registry, cfg.delineate.tally_memory_users)?;
    let mut tsv = String::from(ASSIGNMENTS_HEADER);
    tsv.push('\n');
    let mut groups: HashMap<String, Side> = HashMap::new();
    let mut group_counts = [0usize; 3];
    for (user, counts) in &tally.counts {
        let a = lexdiv::delineate::GroupAssignment::from_counts(user.clone(), counts);
        tsv.push_str(&a.tsv_line());
        tsv.push('\n');
        match a.group {
            Group::Left => group_counts[0] += 1,
            Group::Right => group_counts[1] += 1,
            Group::Excluded => group_counts[2] += 1,
        }
        if let Some(side) = a.group.side() {
            groups.insert(a.user_id, side);
        }
    }

    let window = cfg.date_window();
    let profiles: Vec<UserProfile> = read_jsonl_lines(&profiles_path, "user profile")?;
    let mut admitted: HashMap<String, Side> = HashMap::new();
    let mut rejected = 0usize;
    for p in &profiles {
        if let Some(&side) = groups.get(&p.user_id) {
            if admit_user(p, &window, &cfg.admission).admitted {
                admitted.insert(p.user_id.clone(), side);
            } else {
                rejected += 1;
            }
        }
    }

    let mut per_user: BTreeMap<String, Vec<RawTweet>> = BTreeMap::new();
    let mut seen_ids: HashSet<String> = HashSet::new();
    let (mut outside_window, mut media, mut duplicates, mut total) = (0usize, 0usize, 0usize, 0usize);
    for (i, line) in BufReader::new(File::open(&tweets_path)?).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        total += 1;
        let t: RawTweet = serde_json::from_str(&line).map_err(|e| {
            CliError::Runtime(format!("{}:{}: malformed post: {e}", tweets_path.display(), i + 1))
        })?;
        if !admitted.contains_key(&t.user_id) {
            continue;
        }
        if !window.contains(&t.timestamp) {
            outside_window += 1;
            continue;
        }
        if t.has_media {
            media += 1;
            continue;
        }
        if !seen_ids.insert(t.tweet_id.clone()) {
            duplicates += 1;
            continue;
        }
        per_user.entry(t.user_id.clone()).or_default().push(t);
    }
    let capped: Vec<Vec<RawTweet>> = per_user
        .into_par_iter()
        .map(|(_, ts)| cap_tweets(ts, cfg.delineate.tweet_cap))
        .collect::<lexdiv::Result<_>>()?;
    let mut records: Vec<TweetRecord> = capped
        .into_iter()
        .flatten()
        .map(|t| TweetRecord {
            side: admitted[&t.user_id],
            id: t.tweet_id,
            user: t.user_id,
            ts: t.timestamp,
            text: t.text,
            likes: t.likes,
            rts: t.retweets,
            lang: t.lang_tag,
            raw: None,
            tokens: None,
        })
        .collect();
    records.sort_by(|a, b| id_order(&a.id, &b.id));

    stage.write("group assignments", &cfg.work(files::ASSIGNMENTS), tsv.as_bytes())?;
    stage.write("delineated corpus", &cfg.work(files::CORPUS), &jsonl_bytes(&records)?)?;
    let (left_posts, right_posts) = records.iter().fold((0, 0), |(l, r), x| match x.side {
        Side::Left => (l + 1, r),
        Side::Right => (l, r + 1),
    });
    stage.set_details(json!({
        "tally": tally.summary,
        "groups": {"left": group_counts[0], "right": group_counts[1], "excluded": group_counts[2]},
        "admitted": {"users": admitted.len(), "rejected": rejected},
        "posts": {
            "read": total, "outside_window": outside_window, "media": media, "duplicate_ids": duplicates,
            "kept_left": left_posts, "kept_right": right_posts,
        },
    }));
    stage.finish()
}

/// Drops excluded posts, cleans, tokenizes and lemmatizes the rest.
pub fn clean(cfg: &PipelineConfig) -> CliResult<Manifest> {
    let mut stage = Stage::begin(cfg, "clean", None);
    let records = read_corpus(&mut stage, "delineated corpus", &cfg.work(files::CORPUS))?;
    let pre = preprocessor(&mut stage, cfg)?;
    let out: Vec<TweetRecord> = records.par_iter().filter_map(|r| pre.process(r)).collect();
    stage.write("cleaned corpus", &cfg.work(files::CLEAN), &jsonl_bytes(&out)?)?;
    stage.set_details(json!({"read": records.len(), "kept": out.len(), "dropped": records.len() - out.len()}));
    stage.finish()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelStats {
    /// Whitespace tokens of the uncleaned text.
    pub raw: CorpusStats,
    /// Surface tokens after cleaning.
    pub cleaned: CorpusStats,
    pub lemmatized: CorpusStats,
}

fn level_stats(cfg: &PipelineConfig, recs: &[&TweetRecord]) -> LevelStats {
    let users = recs.iter().map(|r| r.user.as_str()).collect::<HashSet<_>>().len() as u64;
    let raw: Vec<Vec<&str>> = recs.iter().map(|r| r.sentiment_text().split_whitespace().collect()).collect();
    let surf: Vec<Vec<String>> = recs
        .iter()
        .map(|r| tokenize(&r.text, &cfg.clean.emoticons).into_iter().map(|t| t.surface).collect())
        .collect();
    let with_users = |mut s: CorpusStats| {
        s.user_count = users;
        s
    };
    LevelStats {
        raw: with_users(corpus_stats(raw.iter().map(|t| t.iter().copied()))),
        cleaned: with_users(corpus_stats(surf.iter().map(|t| t.iter()))),
        lemmatized: with_users(corpus_stats(recs.iter().map(|r| r.lemmas().iter()))),
    }
}

pub fn stats(cfg: &PipelineConfig) -> CliResult<Manifest> {
    let mut stage = Stage::begin(cfg, "stats", None);
    let recs = read_clean(&mut stage, cfg)?;
    let all: Vec<&TweetRecord> = recs.iter().collect();
    let (left, right): (Vec<&TweetRecord>, Vec<&TweetRecord>) = all.iter().partition(|r| r.side == Side::Left);
    let out = json!({
        "all": level_stats(cfg, &all),
        "left": level_stats(cfg, &left),
        "right": level_stats(cfg, &right),
    });
    stage.write("corpus statistics", &cfg.work(files::STATS), &json_bytes(&out)?)?;
    stage.finish()
}

/// Frequency report over the lexemes passing the configured thresholds.
pub fn freq(cfg: &PipelineConfig) -> CliResult<Manifest> {
    let mut stage = Stage::begin(cfg, "freq", None);
    let recs = read_clean(&mut stage, cfg)?;
    let table = FrequencyTable::build(&recs);
    let eligible = eligible_lexicon(&table, &cfg.freq.profile());
    let rows = table.report(&eligible);
    stage.write("frequency report", &cfg.work(files::FREQ), stats_tsv(&rows).as_bytes())?;
    stage.set_details(json!({"lexemes": table.lexemes.len(), "eligible": eligible.len()}));
    stage.finish()
}
