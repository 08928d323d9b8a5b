use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};

use lexdiv::delineate::UserProfile;
use lexdiv::sentiment::{
    aggregate_users, popularity_regression, score_corpus, series_tsv, side_effect, side_series, PopularityPoint,
};
use serde_json::json;

use super::{files, fmt_opt, json_bytes, read_clean, sentiment_config};
use crate::artifacts::{Manifest, Stage};
use crate::config::PipelineConfig;
use crate::error::{CliError, CliResult};

pub const USERS_TSV_HEADER: &str = "user\tside\tfollowers\tmean\tscored\ttotal";

fn follower_counts(path: &std::path::Path) -> CliResult<HashMap<String, u64>> {
    let mut out = HashMap::new();
    for (i, line) in BufReader::new(File::open(path)?).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let p: UserProfile = serde_json::from_str(&line)
            .map_err(|e| CliError::Runtime(format!("{}:{}: malformed user profile: {e}", path.display(), i + 1)))?;
        out.insert(p.user_id, p.followers_count);
    }
    Ok(out)
}

/// Per-post compound scores → time series, per-user means, the side
/// effect and the popularity regression.
pub fn sentiment(cfg: &PipelineConfig) -> CliResult<Manifest> {
    let seed = cfg.seeds.sentiment;
    let mut stage = Stage::begin(cfg, "sentiment", Some(seed));
    let recs = read_clean(&mut stage, cfg)?;
    let followers = follower_counts(&stage.input("user profiles", &cfg.paths.profiles)?)?;
    let sc = sentiment_config(&mut stage, cfg)?;
    let scores = score_corpus(&recs, &sc);

    let items: Vec<_> = recs
        .iter()
        .zip(&scores)
        .map(|(r, s)| (r.ts, r.side, *s))
        .collect();
    let series = side_series(&items, cfg.sentiment.granularity);

    let users = aggregate_users(&recs, &scores)?;
    let mut users_tsv = String::from(USERS_TSV_HEADER);
    users_tsv.push('\n');
    let mut points = Vec::with_capacity(users.len());
    for u in &users {
        let f = followers.get(&u.user).copied().unwrap_or(0);
        users_tsv.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\n",
            u.user,
            u.side,
            f,
            fmt_opt(u.profile.mean),
            u.profile.scored,
            u.profile.total
        ));
        points.push(PopularityPoint { followers: f, mean: u.profile.mean, side: u.side });
    }
    let means: Vec<_> = users.iter().filter_map(|u| u.user_mean()).collect();
    let effect = side_effect(&means, cfg.sentiment.permutations, seed)?;
    let popularity = popularity_regression(&points, cfg.sentiment.interaction, cfg.sentiment.permutations, seed)?;

    stage.write("sentiment series", &cfg.work(files::SENTIMENT_SERIES), series_tsv(&series).as_bytes())?;
    stage.write("user sentiment", &cfg.work(files::SENTIMENT_USERS), users_tsv.as_bytes())?;
    stage.write("side effect", &cfg.work(files::SENTIMENT_EFFECT), &json_bytes(&effect)?)?;
    stage.write("popularity regression", &cfg.work(files::SENTIMENT_POPULARITY), &json_bytes(&popularity)?)?;
    stage.set_details(json!({
        "posts": recs.len(),
        "scored_posts": scores.iter().filter(|s| !s.all_zero).count(),
        "users": users.len(),
        "side_effect": effect.slope,
        "side_effect_p": effect.p_value,
    }));
    stage.finish()
}
