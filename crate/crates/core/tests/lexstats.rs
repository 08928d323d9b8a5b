use chrono::{TimeZone, Utc};
use lexdiv::lexstats::*;
use lexdiv::{Side, TweetRecord};
use proptest::prelude::*;

fn rec(i: usize, user: &str, side: Side, lemmas: &[&str]) -> TweetRecord {
    TweetRecord {
        id: i.to_string(),
        user: user.into(),
        ts: Utc.with_ymd_and_hms(2020, 1, 1, 0, 0, 0).unwrap(),
        side,
        text: lemmas.join(" "),
        likes: 0,
        rts: 0,
        lang: "en".into(),
        raw: None,
        tokens: Some(lemmas.iter().map(|s| s.to_string()).collect()),
    }
}

const VOCAB: &[&str] = &["a", "b", "c", "d", "e", "😀"];

fn corpus_strategy(max: usize) -> impl Strategy<Value = Vec<TweetRecord>> {
    prop::collection::vec(
        (0usize..12, any::<bool>(), prop::collection::vec(prop::sample::select(VOCAB), 0..8)),
        2..max,
    )
    .prop_map(|rows| {
        let mut out: Vec<TweetRecord> = rows
            .into_iter()
            .enumerate()
            .map(|(i, (u, right, lem))| {
                let side = if right { Side::Right } else { Side::Left };
                rec(i, &format!("u{u}"), side, &lem)
            })
            .collect();
        // both sides present
        out[0].side = Side::Left;
        out[1].side = Side::Right;
        out
    })
}

#[test]
fn fold_worked_values_exact() {
    assert_eq!(log2_fold("w", 100.0, 200.0).unwrap(), 1.0);
    assert_eq!(log2_fold("w", 100.0, 400.0).unwrap(), 2.0);
    assert_eq!(log2_fold("w", 100.0, 100.0).unwrap(), 0.0);
    assert_eq!(log2_fold("w", 400.0, 50.0).unwrap(), -3.0);
    assert!(log2_fold("w", 0.0, 10.0).is_err());
}

#[test]
fn tweet_frequency_examples() {
    let mut sub: Vec<Vec<&str>> = vec![vec!["x"]; 10];
    sub[0] = vec!["w"];
    sub[1] = vec!["w", "w", "w", "w", "w"];
    assert_eq!(tweet_frequency("w", &sub).unwrap(), (2, 200_000.0));
    assert_eq!(tweet_frequency("zzz", &sub).unwrap(), (0, 0.0));
    let empty: Vec<Vec<&str>> = Vec::new();
    assert!(tweet_frequency("w", &empty).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1_000))]
    #[test]
    fn swapping_sides_negates_fold(corpus in corpus_strategy(60)) {
        let t = FrequencyTable::build(&corpus);
        let s = t.swapped();
        let flipped: Vec<TweetRecord> = corpus.iter().map(|r| TweetRecord { side: r.side.flip(), ..r.clone() }).collect();
        prop_assert_eq!(&s, &FrequencyTable::build(&flipped));
        for lex in t.lexemes.keys() {
            let a = t.stats(lex).unwrap().log2_fold;
            let b = s.stats(lex).unwrap().log2_fold;
            prop_assert_eq!(a.map(|x| -x), b);
        }
    }

    #[test]
    fn doubling_leaves_rates_and_folds_unchanged(corpus in corpus_strategy(60)) {
        let t = FrequencyTable::build(&corpus);
        let n = corpus.len();
        let doubled: Vec<TweetRecord> = corpus
            .iter()
            .cloned()
            .chain(corpus.iter().map(|r| TweetRecord { id: (r.id.parse::<usize>().unwrap() + n).to_string(), ..r.clone() }))
            .collect();
        let d = FrequencyTable::build(&doubled);
        for lex in t.lexemes.keys() {
            let (a, b) = (t.stats(lex).unwrap(), d.stats(lex).unwrap());
            prop_assert_eq!(a.rate_left, b.rate_left);
            prop_assert_eq!(a.rate_right, b.rate_right);
            prop_assert_eq!(a.log2_fold, b.log2_fold);
            prop_assert_eq!(b.tweets_left, 2 * a.tweets_left);
        }
    }

    #[test]
    fn embed_profile_monotone(corpus in corpus_strategy(100), lo in 0u64..6, step in 0u64..4) {
        let t = FrequencyTable::build(&corpus);
        let p = |m| EligibilityProfile { min_both: m, ..EligibilityProfile::embed() };
        let wide = eligible_lexicon(&t, &p(lo));
        let narrow = eligible_lexicon(&t, &p(lo + step));
        prop_assert!(narrow.iter().all(|l| wide.contains(l)));
    }

    #[test]
    fn matches_nested_loop_recount(corpus in corpus_strategy(100)) {
        let t = FrequencyTable::build(&corpus);
        for lex in VOCAB {
            let mut tweets = [0u64; 2];
            let mut tokens = [0u64; 2];
            let mut users: [Vec<&str>; 2] = [vec![], vec![]];
            let mut all_users: Vec<&str> = vec![];
            let mut side_tweets = [0u64; 2];
            for r in &corpus {
                let s = if r.side == Side::Left { 0 } else { 1 };
                side_tweets[s] += 1;
                let mut hit = false;
                for l in r.lemmas() {
                    if l == lex {
                        tokens[s] += 1;
                        hit = true;
                    }
                }
                if hit {
                    tweets[s] += 1;
                    if !users[s].contains(&r.user.as_str()) {
                        users[s].push(&r.user);
                    }
                    if !all_users.contains(&r.user.as_str()) {
                        all_users.push(&r.user);
                    }
                }
            }
            match t.lexemes.get(*lex) {
                None => prop_assert_eq!(tokens, [0, 0]),
                Some(c) => {
                    prop_assert_eq!(c.tokens, tokens);
                    prop_assert_eq!(c.tweets, tweets);
                    prop_assert_eq!(c.users, [users[0].len() as u64, users[1].len() as u64]);
                    prop_assert_eq!(c.users_total, all_users.len() as u64);
                    let st = t.stats(lex).unwrap();
                    prop_assert_eq!(st.rate_left, 1e6 * tweets[0] as f64 / side_tweets[0] as f64);
                }
            }
        }
    }
}

#[test]
fn eligibility_examples() {
    let c = |l, r, users| LexemeCounts { tokens: [l, r], tweets: [l, r], users: [0, 0], users_total: users };
    assert!(EligibilityProfile::freq().admits(&c(250, 60, 210)));
    assert!(!EligibilityProfile::freq().admits(&c(199, 199, 300)));
    assert!(EligibilityProfile::embed().admits(&c(199, 199, 300)));
    assert!(!EligibilityProfile::freq().admits(&c(5_000, 5_000, 50)));
    assert!(!EligibilityProfile::embed().admits(&c(500, 99, 300)));
}

#[test]
fn report_sorted_by_absolute_fold() {
    let mut corpus = Vec::new();
    for i in 0..40 {
        let side = if i % 2 == 0 { Side::Left } else { Side::Right };
        let mut lem = vec!["common"];
        if side == Side::Right || i % 8 == 0 {
            lem.push("rightish");
        }
        if side == Side::Left && i % 4 == 0 {
            lem.push("leftish");
        }
        if i % 4 == 1 || i % 8 == 0 {
            lem.push("mild");
        }
        corpus.push(rec(i, &format!("u{i}"), side, &lem));
    }
    let t = FrequencyTable::build(&corpus);
    let rows = t.report(&["common", "rightish", "leftish", "mild"]);
    let order: Vec<&str> = rows.iter().map(|r| r.lexeme.as_str()).collect();
    assert_eq!(order, ["rightish", "mild", "common", "leftish"]);
    assert_eq!(rows[3].log2_fold, None);
    let tsv = stats_tsv(&rows);
    assert!(tsv.starts_with(STATS_TSV_HEADER));
    assert!(tsv.lines().nth(4).unwrap().contains("\tNA\t"));
}
