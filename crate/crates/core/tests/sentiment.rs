use std::collections::HashMap;

use chrono::{TimeZone, Utc};
use lexdiv::sentiment::{
    popularity_regression, score_compound, side_effect, side_series, Granularity, PopularityPoint,
    SentimentConfig, SentimentScore, UserMean,
};
use lexdiv::Side;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Deserialize;

#[derive(Deserialize)]
struct Reference {
    text: String,
    compound: f64,
    pos: f64,
    neg: f64,
    neu: f64,
}

#[test]
fn matches_reference_implementation() {
    let cfg = SentimentConfig::vader();
    let text = include_str!("fixtures/vader_reference.jsonl");
    let mut n = 0;
    for line in text.lines() {
        let r: Reference = serde_json::from_str(line).unwrap();
        let s = lexdiv::sentiment::polarity_scores(&r.text, &cfg);
        assert!((s.compound - r.compound).abs() < 1e-12, "{}: {} vs {}", r.text, s.compound, r.compound);
        assert!((s.pos - r.pos).abs() < 1e-12, "{}", r.text);
        assert!((s.neg - r.neg).abs() < 1e-12, "{}", r.text);
        assert!((s.neu - r.neu).abs() < 1e-12, "{}", r.text);
        n += 1;
    }
    assert_eq!(n, 65);
}

#[test]
fn lexicon_files_load_from_disk() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/data");
    let cfg = SentimentConfig::from_files(
        format!("{dir}/vader_lexicon.txt").as_ref(),
        Some(format!("{dir}/emoji_utf8_lexicon.txt").as_ref()),
    )
    .unwrap();
    assert_eq!(cfg.lexicon.len(), SentimentConfig::vader().lexicon.len());
    assert!(cfg.lexicon.len() > 7000);
}

fn positive_words(cfg: &SentimentConfig) -> Vec<String> {
    let mut words: Vec<String> = cfg
        .lexicon
        .iter()
        .filter(|(w, v)| {
            **v > 0.0
                && w.chars().all(|c| c.is_ascii_lowercase())
                && w.len() > 2
                && !cfg.boosters.contains_key(w.as_str())
        })
        .map(|(w, _)| w.clone())
        .collect();
    words.sort();
    words
}

#[test]
fn negation_lowers_every_positive_word() {
    let cfg = SentimentConfig::vader();
    for w in positive_words(&cfg) {
        let plain = score_compound(&w, &cfg).compound;
        let negated = score_compound(&format!("not {w}"), &cfg).compound;
        assert!(negated < plain, "{w}: {negated} !< {plain}");
    }
}

fn soup_vocab() -> Vec<String> {
    let cfg = SentimentConfig::vader();
    let mut v: Vec<String> = cfg.lexicon.keys().cloned().collect();
    v.sort();
    v.extend(
        ["not", "never", "but", "very", "kind", "of", "least", "at", "no", "!", "!!!", "??", "GREAT", "😀", "😡", "the"]
            .iter()
            .map(|s| s.to_string()),
    );
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn compound_is_bounded(idx in prop::collection::vec(any::<prop::sample::Index>(), 0..60), noise in ".{0,20}") {
        thread_local!(static VOCAB: Vec<String> = soup_vocab());
        thread_local!(static CFG: SentimentConfig = SentimentConfig::vader());
        let text = VOCAB.with(|v| idx.iter().map(|i| i.get(v).as_str()).collect::<Vec<_>>().join(" "));
        let text = format!("{text} {noise}");
        let s = CFG.with(|c| score_compound(&text, c));
        prop_assert!((-1.0..=1.0).contains(&s.compound));
        if s.all_zero {
            prop_assert_eq!(s.compound, 0.0);
        }
    }
}

fn ts(day: u32) -> chrono::DateTime<Utc> {
    Utc.with_ymd_and_hms(2021, 1, day, 8, 0, 0).unwrap()
}

#[test]
fn series_counts_only_scored_tweets() {
    let items = vec![
        (ts(4), Side::Left, SentimentScore { compound: 0.4, all_zero: false }),
        (ts(4), Side::Left, SentimentScore { compound: 0.0, all_zero: true }),
        (ts(5), Side::Right, SentimentScore { compound: -0.2, all_zero: false }),
    ];
    let s = side_series(&items, Granularity::Daily);
    assert_eq!(s.len(), 4);
    assert_eq!(s[0].mean, Some(0.4));
    assert_eq!(s[0].n, 1);
    assert_eq!(s[1].mean, None);
}

fn closed_form_beta(users: &[UserMean]) -> f64 {
    let mut acc: HashMap<bool, (f64, f64)> = HashMap::new();
    for u in users {
        let e = acc.entry(u.side == Side::Right).or_default();
        e.0 += u.weight * u.mean;
        e.1 += u.weight;
    }
    acc[&true].0 / acc[&true].1 - acc[&false].0 / acc[&false].1
}

#[test]
fn planted_shift_recovered() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let users: Vec<UserMean> = (0..200)
        .map(|i| {
            let side = if i < 100 { Side::Left } else { Side::Right };
            let shift = if side == Side::Right { -0.2 } else { 0.0 };
            UserMean {
                side,
                mean: 0.3 + shift + 0.05 * rng.sample::<f64, _>(StandardNormal),
                weight: rng.random_range(5..50) as f64,
            }
        })
        .collect();
    let r = side_effect(&users, 10_000, 7).unwrap();
    assert!((r.slope - closed_form_beta(&users)).abs() < 1e-12);
    assert!((r.slope + 0.2).abs() <= 0.02);
    assert!(r.p_value < 0.001);
}

#[test]
fn null_sides_not_significant() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let users: Vec<UserMean> = (0..60)
        .map(|i| UserMean {
            side: if i % 2 == 0 { Side::Left } else { Side::Right },
            mean: 0.25,
            weight: rng.random_range(1..10) as f64,
        })
        .collect();
    let r = side_effect(&users, 2000, 1).unwrap();
    assert!(r.slope.abs() < 1e-12);
    assert!(r.p_value > 0.05);
}

#[test]
fn noisy_popularity_slope_recovered() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let pts: Vec<PopularityPoint> = (0..500)
        .map(|i| {
            let f = 10f64.powf(rng.random_range(0.0..6.0)).round().max(1.0) as u64;
            PopularityPoint {
                followers: f,
                mean: Some(0.06 * (f as f64).log10() - 0.1 + 0.05 * rng.sample::<f64, _>(StandardNormal)),
                side: if i % 2 == 0 { Side::Left } else { Side::Right },
            }
        })
        .collect();
    let r = popularity_regression(&pts, false, 1000, 2).unwrap();
    assert!((r.slope - 0.06).abs() <= 0.01, "slope {}", r.slope);
    assert!(r.p_value < 0.01);
}
