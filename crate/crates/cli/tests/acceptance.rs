//! Acceptance criteria 1–10. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails. Optional arguments select criteria by
//! number: `cargo test --test acceptance -- 6 10`.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Cursor;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use chrono::{TimeZone, Utc};
use lexdiv::annotate::{
    agreement, build_session, session_scores, Composition, Pair, PairKind, Passage, Session, TargetPassages,
};
use lexdiv::corpus::read_jsonl;
use lexdiv::delineate::{
    assign_group, stream_tally, BiasCategory, GroupAssignment, OutletEntry, OutletRegistry,
};
use lexdiv::embed::{
    align, divergence_table, load_embedding, procrustes, shared_vocab, train, AlignOptions, Embedding,
    EmbeddingParams,
};
use lexdiv::lexstats::{eligible_lexicon, log2_fold, FrequencyTable};
use lexdiv::linalg::{orthogonality_residual, random_orthogonal, Mat};
use lexdiv::sentiment::{score_compound, side_effect, SentimentConfig, UserMean};
use lexdiv::stats::ks_uniform;
use lexdiv::textprep::{clean_text, CleanRuleSet};
use lexdiv::topics::{doc_vector, evaluate, IdfTable};
use lexdiv::{Side, TweetRecord};
use lexdiv_cli::commands::{self, files};
use lexdiv_cli::config::PipelineConfig;
use lexdiv_cli::fixture::{make_fixture, FixtureOutput, FixtureSpec};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn scratch(name: &str) -> tempfile::TempDir {
    tempfile::Builder::new().prefix(&format!("lexdiv-acceptance-{name}-")).tempdir().unwrap()
}

fn fixture_config(fx: &FixtureOutput, overrides: &[String]) -> PipelineConfig {
    PipelineConfig::load(Some(&fx.config_path), overrides, &fx.dir).unwrap()
}

// 1 ---------------------------------------------------------------------

fn sentiment_anchors() -> Outcome {
    let cfg = SentimentConfig::vader();
    let anchors = [("This is great!", 0.66), ("This is great! :)", 0.81), ("This is not great!", -0.51)];
    let mut ok = true;
    let mut parts = Vec::new();
    for (text, want) in anchors {
        let got = score_compound(text, &cfg).compound;
        let hit = (got - want).abs() <= 0.01;
        ok &= hit;
        parts.push(format!("{text:?} {got:.4} (want {want:+.2}{})", if hit { "" } else { ", off" }));
    }
    check(ok, parts.join("; "))
}

// 2 ---------------------------------------------------------------------

#[derive(serde::Deserialize)]
struct CleanPair {
    rule: String,
    raw: String,
    clean: String,
}

const FUZZ_ALPHABET: &[&str] = &[
    "a", "m", "p", "h", "A", "M", "P", "x", "É", "ß", "1", "3", "0", ":", ";", ")", "(", "<", "D", "-", "/", ".", ",",
    "!", "?", "#", "@", "_", "'", "’", " ", " ", "\t", "\n", "http://", "https://t.co/", "www.", "\u{1F44D}",
    "\u{1F3FD}", "\u{200D}", "\u{2640}", "\u{FE0F}", "\u{1F469}", "\u{2764}", "\u{1F602}", "ha", "o", " at ", "pm",
    "AM", ":)", "<3", ":D", "\u{201C}", "\u{2026}", "\u{0301}", "İ", "ǅ", "Σ",
];

fn fuzz_input(rng: &mut ChaCha8Rng) -> String {
    if rng.random_bool(0.75) {
        let n = rng.random_range(0..40);
        (0..n).map(|_| *FUZZ_ALPHABET.choose(rng).unwrap()).collect()
    } else {
        let n = rng.random_range(0..30);
        (0..n)
            .map(|_| loop {
                if let Some(c) = char::from_u32(rng.random_range(0..0x2_0000)) {
                    break c;
                }
            })
            .collect()
    }
}

fn cleaning_suite() -> Outcome {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/clean_pairs.jsonl");
    let text = fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    let pairs: Vec<CleanPair> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let rules = CleanRuleSet::default();
    let wrong: Vec<String> = pairs
        .iter()
        .filter(|p| clean_text(&p.raw, &rules) != p.clean)
        .map(|p| format!("[{}] {:?}", p.rule, p.raw))
        .collect();
    let covered: BTreeSet<&str> = pairs.iter().map(|p| p.rule.as_str()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut not_idempotent = Vec::new();
    for _ in 0..10_000 {
        let s = fuzz_input(&mut rng);
        let once = clean_text(&s, &rules);
        if clean_text(&once, &rules) != once {
            not_idempotent.push(s);
        }
    }
    check(
        pairs.len() >= 50 && wrong.is_empty() && not_idempotent.is_empty(),
        format!(
            "{}/{} pairs exact over rules {{{}}}; {} of 10000 fuzz inputs not idempotent{}",
            pairs.len() - wrong.len(),
            pairs.len(),
            covered.into_iter().collect::<Vec<_>>().join(","),
            not_idempotent.len(),
            if wrong.is_empty() { String::new() } else { format!("; failing {}", wrong.join(" ")) }
        ),
    )
}

// 3 ---------------------------------------------------------------------

const CATEGORIES: [BiasCategory; 5] =
    [BiasCategory::Left, BiasCategory::LeanLeft, BiasCategory::Center, BiasCategory::LeanRight, BiasCategory::Right];

fn registry() -> OutletRegistry {
    OutletRegistry::new(
        (0..72)
            .map(|i| OutletEntry {
                account_id: format!("acct{i}"),
                display_name: format!("Outlet {i}"),
                category: CATEGORIES[i % 5],
                follower_count: 1000 + i as u64,
            })
            .collect(),
    )
    .unwrap()
}

fn population(n: usize, rng: &mut ChaCha8Rng) -> BTreeMap<String, Vec<String>> {
    let left: Vec<usize> = (0..72).filter(|i| i % 5 == 0).collect();
    let right: Vec<usize> = (0..72).filter(|i| i % 5 >= 3).collect();
    (0..n)
        .map(|u| {
            let pool = if rng.random_bool(0.5) { &left } else { &right };
            let k = rng.random_range(0..5);
            let mut f: Vec<String> = (0..k).map(|_| format!("acct{}", pool.choose(rng).unwrap())).collect();
            if rng.random_bool(0.2) {
                f.push(format!("acct{}", rng.random_range(0..72)));
            }
            if rng.random_bool(0.1) {
                f.push(format!("elsewhere{}", rng.random_range(0..10)));
            }
            (format!("user{u}"), f)
        })
        .collect()
}

/// Nested loops over the registry rows: distinct followed accounts per
/// category, then the two-pole rule.
fn recount(follows: &[String], rows: &[OutletEntry]) -> (u32, u32, u32, &'static str) {
    let distinct: BTreeSet<&String> = follows.iter().collect();
    let (mut l, mut r, mut o) = (0, 0, 0);
    for acc in distinct {
        for e in rows.iter().filter(|e| &e.account_id == acc) {
            match e.category {
                BiasCategory::Left => l += 1,
                BiasCategory::LeanRight | BiasCategory::Right => r += 1,
                _ => o += 1,
            }
        }
    }
    let g = match (l, r, o) {
        (l, 0, 0) if l >= 2 => "Left",
        (0, r, 0) if r >= 2 => "Right",
        _ => "Excluded",
    };
    (l, r, o, g)
}

fn delineation_oracle() -> Outcome {
    let reg = registry();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let pop = population(10_000, &mut rng);
    let mut mismatches = 0;
    for (user, follows) in &pop {
        let a = assign_group(user, follows, &reg);
        let (l, r, o, g) = recount(follows, reg.entries());
        if (a.left_count, a.right_pole_count, a.other_count, a.group.as_str()) != (l, r, o, g) {
            mismatches += 1;
        }
    }

    let mut records: Vec<String> =
        pop.iter().flat_map(|(u, f)| f.iter().map(move |a| format!("{a}\t{u}\n"))).collect();
    while records.len() < 1_000_000 {
        let r = records[rng.random_range(0..records.len())].clone();
        records.push(r);
    }
    let base = stream_tally([Cursor::new(records.concat())], &reg, usize::MAX).unwrap();
    records.shuffle(&mut rng);
    let shuffled = stream_tally([Cursor::new(records.concat())], &reg, usize::MAX).unwrap();
    let spilled = stream_tally([Cursor::new(records.concat())], &reg, 2_000).unwrap();
    let mut tally_mismatches = 0;
    for (user, follows) in &pop {
        let (l, r, o, g) = recount(follows, reg.entries());
        if let Some(c) = base.counts.get(user) {
            let a = GroupAssignment::from_counts(user.as_str(), c);
            if (a.left_count, a.right_pole_count, a.other_count, a.group.as_str()) != (l, r, o, g) {
                tally_mismatches += 1;
            }
        } else if l + r + o > 0 {
            tally_mismatches += 1;
        }
    }
    check(
        mismatches == 0 && tally_mismatches == 0 && base.counts == shuffled.counts && base.counts == spilled.counts,
        format!(
            "10000 users: {mismatches} assignment and {tally_mismatches} tally mismatches vs recount; \
             1e6 shuffled records invariant: {}; spilled ({} runs) invariant: {}",
            base.counts == shuffled.counts,
            spilled.summary.spilled_runs,
            base.counts == spilled.counts
        ),
    )
}

// 4 ---------------------------------------------------------------------

fn lemma_record(i: usize, user: &str, side: Side, lemmas: Vec<String>) -> TweetRecord {
    TweetRecord {
        id: i.to_string(),
        user: user.into(),
        ts: Utc.with_ymd_and_hms(2021, 3, 1, 0, 0, 0).unwrap(),
        side,
        text: lemmas.join(" "),
        likes: 0,
        rts: 0,
        lang: "en".into(),
        raw: None,
        tokens: Some(lemmas),
    }
}

fn random_corpus(rng: &mut ChaCha8Rng) -> Vec<TweetRecord> {
    const VOCAB: &[&str] = &["a", "b", "c", "d", "e", "f", "😀"];
    let n = rng.random_range(2..80);
    let mut out: Vec<TweetRecord> = (0..n)
        .map(|i| {
            let side = if rng.random_bool(0.5) { Side::Right } else { Side::Left };
            let k = rng.random_range(0..8);
            let lem = (0..k).map(|_| VOCAB.choose(rng).unwrap().to_string()).collect();
            lemma_record(i, &format!("u{}", rng.random_range(0..12)), side, lem)
        })
        .collect();
    out[0].side = Side::Left;
    out[1].side = Side::Right;
    out
}

fn frequency_metrics() -> Outcome {
    let worked = [(100.0, 200.0, 1.0), (100.0, 400.0, 2.0)];
    let exact = worked.iter().all(|&(l, r, want)| log2_fold("w", l, r).unwrap() == want);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut anti, mut scale) = (0, 0);
    for _ in 0..1000 {
        let corpus = random_corpus(&mut rng);
        let t = FrequencyTable::build(&corpus);
        let flipped: Vec<TweetRecord> = corpus.iter().map(|r| TweetRecord { side: r.side.flip(), ..r.clone() }).collect();
        let f = FrequencyTable::build(&flipped);
        let n = corpus.len();
        let doubled: Vec<TweetRecord> = corpus
            .iter()
            .cloned()
            .chain(corpus.iter().map(|r| TweetRecord { id: (r.id.parse::<usize>().unwrap() + n).to_string(), ..r.clone() }))
            .collect();
        let d = FrequencyTable::build(&doubled);
        let mut a_ok = true;
        let mut s_ok = true;
        for lex in t.lexemes.keys() {
            let base = t.stats(lex).unwrap();
            a_ok &= f.stats(lex).unwrap().log2_fold == base.log2_fold.map(|x| -x);
            let dd = d.stats(lex).unwrap();
            s_ok &= dd.log2_fold == base.log2_fold && dd.rate_left == base.rate_left && dd.rate_right == base.rate_right;
        }
        anti += usize::from(a_ok);
        scale += usize::from(s_ok);
    }
    check(
        exact && anti == 1000 && scale == 1000,
        format!("200/100→{}, 400/100→{}; antisymmetry {anti}/1000, scale invariance {scale}/1000 tables",
            log2_fold("w", 100.0, 200.0).unwrap(), log2_fold("w", 100.0, 400.0).unwrap()),
    )
}

// 5 ---------------------------------------------------------------------

fn gaussian(n: usize, d: usize, rng: &mut ChaCha8Rng) -> Mat {
    Mat::from_vec(n, d, (0..n * d).map(|_| rng.sample(StandardNormal)).collect())
}

fn embedding_from(words: &[String], rows: &Mat) -> Embedding {
    let params = EmbeddingParams { dim: rows.cols(), ..EmbeddingParams::default() };
    Embedding::from_parts(
        words.to_vec(),
        vec![1; words.len()],
        rows.cols(),
        rows.as_slice().iter().map(|&x| x as f32).collect(),
        BTreeMap::new(),
        params,
    )
}

/// ⟨Q, AᵀB⟩; ‖AQ − B‖² = ‖A‖² + ‖B‖² − 2⟨Q, AᵀB⟩, so a larger value is a
/// smaller residual.
fn fit(q: &Mat, atb: &Mat) -> f64 {
    q.as_slice().iter().zip(atb.as_slice()).map(|(x, y)| x * y).sum()
}

fn procrustes_recovery() -> Outcome {
    let (dim, n) = (50, 500);
    let words: Vec<String> = (0..n).map(|i| format!("w{i}")).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut min_sim, mut max_resid, mut optimal) = (f64::INFINITY, 0.0f64, 0);
    for _ in 0..100 {
        let a = gaussian(n, dim, &mut rng);
        let r = random_orthogonal(dim, &mut rng);
        let left = embedding_from(&words, &a);
        // f32 storage, then rotate the stored values so the plant is exact
        let stored = Mat::from_vec(n, dim, left.word_vectors.iter().map(|&x| x as f64).collect());
        let right = embedding_from(&words, &stored.matmul(&r));
        let pair = align(left, right, &words, AlignOptions::default()).map_err(|e| e.to_string())?;
        min_sim = min_sim.min(pair.mean_self_similarity);
        max_resid = max_resid.max(orthogonality_residual(&pair.rotation));

        // optimality on a noisy target, where no rotation fits exactly
        let noisy = Mat::from_vec(
            n,
            dim,
            a.matmul(&r).as_slice().iter().map(|x| x + 0.5 * rng.sample::<f64, _>(StandardNormal)).collect(),
        );
        let q = procrustes(&a, &noisy).map_err(|e| e.to_string())?;
        let atb = a.transpose().matmul(&noisy);
        let best = fit(&q, &atb);
        let beats_all = fit(&r, &atb) <= best + 1e-9
            && (0..1000).all(|_| fit(&random_orthogonal(dim, &mut rng), &atb) <= best + 1e-9);
        optimal += usize::from(beats_all);
    }
    check(
        min_sim >= 0.999_999 && max_resid <= 1e-6 && optimal == 100,
        format!(
            "100 trials dim 50 |V| 500: min self-similarity {min_sim:.12}, max ‖QᵀQ−I‖ {max_resid:.2e}, \
             optimal vs planted + 1000 random rotations in {optimal}/100"
        ),
    )
}

// 6 ---------------------------------------------------------------------

const HOMONYM_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];
const HOMONYM_TWEETS_PER_USER: usize = 110;

fn homonym_rank(seed: u64) -> Result<(usize, usize, usize, Vec<usize>), String> {
    let dir = scratch("homonym");
    let spec = FixtureSpec {
        seed,
        users_per_side: 500,
        tweets_per_user: HOMONYM_TWEETS_PER_USER,
        controls: 20,
        ..FixtureSpec::default()
    };
    let fx = make_fixture(&spec, dir.path()).map_err(|e| e.to_string())?;
    let cfg = fixture_config(&fx, &[]);
    commands::delineate(&cfg).map_err(|e| e.to_string())?;
    commands::clean(&cfg).map_err(|e| e.to_string())?;
    let recs = read_jsonl(&cfg.work(files::CLEAN)).map_err(|e| e.to_string())?;
    let side = |s: Side| -> Vec<&[String]> { recs.iter().filter(|r| r.side == s).map(|r| r.lemmas()).collect() };
    let (ls, rs) = (side(Side::Left), side(Side::Right));
    let per_side = ls.len().min(rs.len());
    let l = train(&ls, &cfg.embed).map_err(|e| e.to_string())?;
    let r = train(&rs, &cfg.embed).map_err(|e| e.to_string())?;
    let table = FrequencyTable::build(&recs);
    let shared = shared_vocab(&l, &r, &eligible_lexicon(&table, &cfg.align.profile()));
    let pair = align(l, r, &shared, AlignOptions { center: cfg.align.center }).map_err(|e| e.to_string())?;
    let rows = divergence_table(&pair, &table);
    let rank = |w: &str| rows.iter().position(|row| row.lexeme == w).map(|i| i + 1);
    let target = &fx.ground_truth.divergent[0].word;
    let hr = rank(target).ok_or_else(|| format!("seed {seed}: homonym `{target}` not in the shared vocabulary"))?;
    let controls = fx.ground_truth.stable.iter().filter_map(|c| rank(c)).collect();
    Ok((hr, rows.len(), per_side, controls))
}

fn planted_homonym() -> Outcome {
    let mut hits = 0;
    let mut parts = Vec::new();
    let mut enough_data = true;
    for seed in HOMONYM_SEEDS {
        match homonym_rank(seed) {
            Ok((rank, n, per_side, mut controls)) => {
                let top = rank * 10 <= n;
                hits += usize::from(top);
                enough_data &= per_side >= 50_000;
                controls.sort_unstable();
                let median = controls.get(controls.len() / 2).copied().unwrap_or(0);
                parts.push(format!("seed {seed}: rank {rank}/{n} ({per_side} posts/side, control median {median})"));
            }
            Err(e) => parts.push(e),
        }
    }
    check(hits >= 4 && enough_data, format!("top decile in {hits}/5; {}", parts.join("; ")))
}

// 7 ---------------------------------------------------------------------

fn classifier_sanity() -> Outcome {
    let dir = scratch("classify");
    let spec = FixtureSpec { seed: 7, topic_skew: 0.6, ..FixtureSpec::default() };
    let fx = make_fixture(&spec, dir.path()).map_err(|e| e.to_string())?;
    let cfg = fixture_config(&fx, &[]);
    for f in [commands::delineate, commands::clean] {
        f(&cfg).map_err(|e| e.to_string())?;
    }
    commands::embed(&cfg, false).map_err(|e| e.to_string())?;
    commands::classify(&cfg).map_err(|e| e.to_string())?;
    let tsv = fs::read_to_string(cfg.work(files::CLASSIFIER)).map_err(|e| e.to_string())?;
    let row: Vec<f64> = tsv.lines().nth(1).unwrap().split('\t').map(|v| v.parse().unwrap()).collect();
    let (acc, kappa) = (row[0], row[1]);

    // same documents, labels shuffled
    let recs = read_jsonl(&cfg.work(files::CLEAN)).map_err(|e| e.to_string())?;
    let emb = load_embedding(&cfg.work(files::EMBED_ALL)).map_err(|e| e.to_string())?;
    let docs: Vec<&[String]> = recs.iter().map(|r| r.lemmas()).collect();
    let idf = IdfTable::build(&docs);
    let kept: Vec<_> = recs
        .iter()
        .map(|r| doc_vector(&r.id, r.lemmas(), r.side, &emb, &idf))
        .filter(|d| !d.degenerate)
        .collect();
    let x: Vec<Vec<f64>> = kept.iter().map(|d| d.vector.clone()).collect();
    let mut y: Vec<Side> = kept.iter().map(|d| d.side).collect();
    y.shuffle(&mut ChaCha8Rng::seed_from_u64(70));
    let null = evaluate(&x, &y, 100, cfg.seeds.classify, cfg.topics.lambda).map_err(|e| e.to_string())?;
    check(
        acc > 0.55 && kappa > 0.05 && (null.accuracy - 0.5).abs() <= 0.03 && null.kappa.abs() <= 0.05,
        format!(
            "skewed: accuracy {acc:.4}, kappa {kappa:.4} over {} docs; shuffled: accuracy {:.4}, kappa {:.4}",
            null.n, null.accuracy, null.kappa
        ),
    )
}

// 8 ---------------------------------------------------------------------

const EIGHT: [&str; 8] = ["cat", "bat", "mask", "vote", "fire", "wall", "march", "trump"];

fn passage(target: &str, side: Side, i: usize) -> Passage {
    let text = format!("a note about {target} number {i}");
    Passage {
        tweet_id: format!("{target}-{side}-{i}"),
        user_id: format!("{side}{i}"),
        side,
        target: target.into(),
        full_len: text.chars().count(),
        match_start: 13,
        match_len: target.chars().count(),
        text_window: text,
    }
}

/// Ratings by annotator A and the alternate value B gives on every second
/// pair of a (target, kind).
fn scripted(t: usize, kind: PairKind) -> (u8, u8) {
    match kind {
        PairKind::LR => (1 + (t % 4) as u8, 1 + ((t + 1) % 4) as u8),
        PairKind::LL => (4, 3),
        PairKind::RR => (1 + (t % 2) as u8 * 3, 2),
    }
}

fn durel_math() -> Outcome {
    let pools: Vec<TargetPassages> = EIGHT
        .iter()
        .map(|t| TargetPassages {
            target: t.to_string(),
            left: (0..20).map(|i| passage(t, Side::Left, i)).collect(),
            right: (0..20).map(|i| passage(t, Side::Right, i)).collect(),
        })
        .collect();
    let schedule = build_session(&pools, 8).map_err(|e| e.to_string())?;
    let composition = schedule.total_composition();
    let dir = scratch("durel");
    let ts = Utc.with_ymd_and_hms(2021, 6, 1, 0, 0, 0).unwrap();
    let mut s = Session::create(dir.path(), "s", schedule, ts).map_err(|e| e.to_string())?;
    let pairs: Vec<Pair> = s.state().schedule.pairs.clone();
    let mut seen: BTreeMap<(String, PairKind), usize> = BTreeMap::new();
    for p in &pairs {
        let t = EIGHT.iter().position(|x| *x == p.target).unwrap();
        let j = seen.entry((p.target.clone(), p.kind)).or_default();
        let (a, b) = scripted(t, p.kind);
        s.record_rating(&p.pair_id, "A", i64::from(a), ts).map_err(|e| e.to_string())?;
        s.record_rating(&p.pair_id, "B", i64::from(if *j % 2 == 0 { a } else { b }), ts).map_err(|e| e.to_string())?;
        *j += 1;
    }
    let scores = session_scores(s.state(), &["A".to_string(), "B".to_string()]).map_err(|e| e.to_string())?;
    let mut exact = scores.len() == 8;
    for (t, sc) in scores.iter().enumerate() {
        exact &= sc.target == EIGHT[t] && (sc.n_lr, sc.n_ll, sc.n_rr) == (20, 10, 10);
        for (kind, n, score, se) in [
            (PairKind::LR, 20.0f64, sc.divergence, sc.divergence_se),
            (PairKind::LL, 10.0, sc.polysemy_left, sc.polysemy_left_se),
            (PairKind::RR, 10.0, sc.polysemy_right, sc.polysemy_right_se),
        ] {
            let (a, b) = scripted(t, kind);
            let (a, b) = (f64::from(a), f64::from(b));
            // half the pair means are a, half (a + b) / 2
            let want = 4.0 - (0.75 * a + 0.25 * b);
            let want_se = (b - a).abs() / 4.0 * (n / (n - 1.0)).sqrt() / n.sqrt();
            exact &= score == want && (se - want_se).abs() < 1e-12;
        }
    }
    let x = [1.0, 2.0, 3.0, 4.0];
    let rho = |b: &[f64]| agreement(&x, b).ok().and_then(|a| a.rho);
    let rhos = [rho(&x), rho(&[4.0, 3.0, 2.0, 1.0]), rho(&[2.0, 1.0, 4.0, 3.0])];
    let spearman = rhos == [Some(1.0), Some(-1.0), Some(0.6)];
    let comp_ok = composition == Composition { lr: 160, ll: 80, rr: 80 };
    check(
        exact && spearman && comp_ok,
        format!(
            "8 targets / {} pairs; composition {{LR {}, LL {}, RR {}}}; scores exact: {exact}; spearman {:?}",
            pairs.len(),
            composition.lr,
            composition.ll,
            composition.rr,
            rhos.map(|r| r.unwrap_or(f64::NAN))
        ),
    )
}

// 9 ---------------------------------------------------------------------

fn users(shift: f64, rng: &mut ChaCha8Rng) -> Vec<UserMean> {
    (0..200)
        .map(|i| {
            let side = if i < 100 { Side::Left } else { Side::Right };
            let delta = if side == Side::Right { shift } else { 0.0 };
            UserMean {
                side,
                mean: 0.1 + delta + 0.05 * rng.sample::<f64, _>(StandardNormal),
                weight: rng.random_range(5..60) as f64,
            }
        })
        .collect()
}

fn side_effect_estimator() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let planted = side_effect(&users(-0.2, &mut rng), 10_000, 90).map_err(|e| e.to_string())?;
    let nulls: Vec<f64> = (0..50)
        .map(|k| side_effect(&users(0.0, &mut rng), 10_000, 900 + k).map(|r| r.p_value))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let (d, ks_p) = ks_uniform(&nulls).unwrap();
    check(
        (planted.slope + 0.2).abs() <= 0.02 && planted.p_value < 0.001 && ks_p > 0.01,
        format!(
            "planted −0.2: β {:.4}, p {:.5}; 50 null runs: KS D {d:.3}, p {ks_p:.3}",
            planted.slope, planted.p_value
        ),
    )
}

// 10 --------------------------------------------------------------------

fn tree_bytes(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for e in fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                if p.file_name().unwrap() != "manifests" {
                    walk(root, &p, out);
                }
            } else {
                out.insert(p.strip_prefix(root).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

fn pipeline_reproducibility() -> Outcome {
    let dir = scratch("repro");
    let fx = make_fixture(&FixtureSpec { seed: 10, ..FixtureSpec::default() }, dir.path()).map_err(|e| e.to_string())?;
    let mut trees = Vec::new();
    for work in ["work-a", "work-b"] {
        let cfg = fixture_config(&fx, &[format!("paths.work_dir=\"{work}\""), "report.svg=true".into()]);
        lexdiv_cli::run_stages(&cfg, commands::DETERMINISTIC_STAGES, false).map_err(|e| e.to_string())?;
        trees.push(tree_bytes(&cfg.paths.work_dir));
    }
    let (a, b) = (&trees[0], &trees[1]);
    let differing: Vec<String> = a
        .keys()
        .chain(b.keys())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .filter(|k| a.get(*k) != b.get(*k))
        .map(|k| k.display().to_string())
        .collect();
    check(
        differing.is_empty() && a.len() > 20,
        format!("{} artifacts compared across two full runs; differing: [{}]", a.len(), differing.join(", ")),
    )
}

// -----------------------------------------------------------------------

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "sentiment anchors", limit: Duration::from_secs(1), run: sentiment_anchors },
        Criterion { id: 2, name: "cleaning fixture suite", limit: Duration::from_secs(10), run: cleaning_suite },
        Criterion { id: 3, name: "delineation oracle", limit: Duration::from_secs(30), run: delineation_oracle },
        Criterion { id: 4, name: "frequency metrics", limit: Duration::from_secs(5), run: frequency_metrics },
        Criterion { id: 5, name: "procrustes", limit: Duration::from_secs(60), run: procrustes_recovery },
        Criterion { id: 6, name: "planted homonym", limit: Duration::from_secs(600), run: planted_homonym },
        Criterion { id: 7, name: "classifier sanity", limit: Duration::from_secs(120), run: classifier_sanity },
        Criterion { id: 8, name: "DURel math", limit: Duration::from_secs(5), run: durel_math },
        Criterion { id: 9, name: "side-effect estimator", limit: Duration::from_secs(120), run: side_effect_estimator },
        Criterion { id: 10, name: "pipeline reproducibility", limit: Duration::from_secs(900), run: pipeline_reproducibility },
    ];
    let wanted: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = Vec::new();
    for c in criteria.iter().filter(|c| wanted.is_empty() || wanted.contains(&c.id)) {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(c.run).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let took = start.elapsed();
        let in_time = took <= c.limit;
        let (pass, detail) = match outcome {
            Ok(d) => (in_time, d),
            Err(d) => (false, d),
        };
        let timing = format!("{:.2}s of {}s{}", took.as_secs_f64(), c.limit.as_secs(), if in_time { "" } else { ", over limit" });
        println!("{} criterion {:>2} {}: {detail} [{timing}]", if pass { "PASS" } else { "FAIL" }, c.id, c.name);
        if !pass {
            failed.push(c.id);
        }
    }
    if !failed.is_empty() {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
    println!("acceptance: all selected criteria passed");
}
