//! One function per subcommand. Each reads its declared inputs through a
//! [`Stage`], writes outputs atomically and returns the run manifest.
//! Locking is the caller's job (see [`crate::run_stages`]).

mod annotate;
mod corpus;
mod embedding;
mod report;
mod sentiment;
mod topics;

use std::path::{Path, PathBuf};

use lexdiv::corpus::{read_jsonl, TweetRecord};
use lexdiv::sentiment::SentimentConfig;
use lexdiv::textprep::{Lemmatizer, Preprocessor, RuleLemmatizer};

use crate::artifacts::Stage;
use crate::config::PipelineConfig;
use crate::error::{CliError, CliResult};

pub use annotate::{
    agreement_file, annotate_agreement, annotate_build, annotate_llm, annotate_score, annotate_serve, passage_seed,
    SCORES_FILE,
};
pub use corpus::{clean, delineate, freq, stats};
pub use embedding::{align, diverge, embed};
pub use report::report;
pub use sentiment::sentiment;
pub use topics::{classify, topics};

/// Artifact paths relative to the working directory.
pub mod files {
    pub const ASSIGNMENTS: &str = "assignments.tsv";
    pub const CORPUS: &str = "corpus.jsonl";
    pub const CLEAN: &str = "clean.jsonl";
    pub const STATS: &str = "stats.json";
    pub const FREQ: &str = "freq.tsv";
    pub const SENTIMENT_SERIES: &str = "sentiment/series.tsv";
    pub const SENTIMENT_USERS: &str = "sentiment/users.tsv";
    pub const SENTIMENT_EFFECT: &str = "sentiment/effect.json";
    pub const SENTIMENT_POPULARITY: &str = "sentiment/popularity.json";
    pub const EMBED_LEFT: &str = "embed/left.vec";
    pub const EMBED_RIGHT: &str = "embed/right.vec";
    pub const EMBED_ALL: &str = "embed/all.vec";
    pub const EMBED_TUNE: &str = "embed/tune.json";
    pub const ALIGNMENT: &str = "alignment.json";
    pub const DIVERGENCE: &str = "divergence.tsv";
    pub const TOPIC_MAP: &str = "topics/map.tsv";
    pub const TOPIC_KEYWORDS: &str = "topics/keywords.tsv";
    pub const CLASSIFIER: &str = "classifier.tsv";
    pub const ANNOTATE_DIR: &str = "annotate";
    pub const REPORT: &str = "report/report.tsv";
    pub const REPORT_MAP_SVG: &str = "report/map.svg";
    pub const REPORT_DIVERGENCE_SVG: &str = "report/divergence.svg";
    pub const REPORT_POPULARITY_SVG: &str = "report/popularity.svg";
}

/// Stages covered by `all`, in dependency order. Their outputs are pure
/// functions of inputs, config and seeds.
pub const DETERMINISTIC_STAGES: &[&str] = &[
    "delineate",
    "clean",
    "stats",
    "freq",
    "sentiment",
    "embed",
    "align",
    "diverge",
    "topics",
    "classify",
    "report",
];

impl PipelineConfig {
    pub fn work(&self, rel: &str) -> PathBuf {
        self.paths.work_dir.join(rel)
    }
}

pub(crate) fn read_corpus(stage: &mut Stage, role: &str, path: &Path) -> CliResult<Vec<TweetRecord>> {
    let p = stage.input(role, path)?;
    Ok(read_jsonl(&p)?)
}

pub(crate) fn read_clean(stage: &mut Stage, cfg: &PipelineConfig) -> CliResult<Vec<TweetRecord>> {
    let recs = read_corpus(stage, "cleaned corpus", &cfg.work(files::CLEAN))?;
    if recs.iter().any(|r| r.tokens.is_none()) {
        return Err(CliError::Runtime(format!(
            "{} holds records without tokens; rerun `clean`",
            cfg.work(files::CLEAN).display()
        )));
    }
    Ok(recs)
}

pub(crate) fn jsonl_bytes(records: &[TweetRecord]) -> CliResult<Vec<u8>> {
    let mut out = Vec::new();
    lexdiv::corpus::write_jsonl_to(&mut out, records)?;
    Ok(out)
}

pub(crate) fn json_bytes<T: serde::Serialize>(value: &T) -> CliResult<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value)?;
    v.push(b'\n');
    Ok(v)
}

pub(crate) fn preprocessor(stage: &mut Stage, cfg: &PipelineConfig) -> CliResult<Preprocessor> {
    let mut rules = cfg.clean.clone();
    if let Some(p) = stage.optional_input("emoticon dictionary", cfg.paths.emoticons.as_deref())? {
        let extra = lexdiv::textprep::EmoticonDict::load(&p)?;
        rules.emoticons.extend(extra.iter());
    }
    let mut lem = RuleLemmatizer::default();
    if let Some(p) = stage.optional_input("lemma exceptions", cfg.paths.lemma_exceptions.as_deref())? {
        lem = lem.with_exceptions_file(&p)?;
    }
    let lem: Box<dyn Lemmatizer> = Box::new(lem);
    Ok(Preprocessor::new(rules, lem))
}

pub(crate) fn sentiment_config(stage: &mut Stage, cfg: &PipelineConfig) -> CliResult<SentimentConfig> {
    let mut sc = match stage.optional_input("sentiment lexicon", cfg.paths.lexicon.as_deref())? {
        Some(lex) => {
            let emoji = stage.optional_input("emoji lexicon", cfg.paths.emoji_lexicon.as_deref())?;
            SentimentConfig::from_files(&lex, emoji.as_deref())?
        }
        None if cfg.sentiment.mini_lexicon => SentimentConfig::mini(),
        None => SentimentConfig::vader(),
    };
    if let Some(p) = stage.optional_input("booster list", cfg.paths.boosters.as_deref())? {
        sc.load_boosters(&p)?;
    }
    if let Some(p) = stage.optional_input("negation list", cfg.paths.negations.as_deref())? {
        sc.load_negations(&p)?;
    }
    sc.validate()?;
    Ok(sc)
}

/// `{:.6}` with `NA` for a missing value.
pub(crate) fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x:.6}"))
}
