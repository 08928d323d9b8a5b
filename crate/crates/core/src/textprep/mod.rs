//! Cleaning rules, tweet exclusion, tokenization, lemmatization and
//! type/token statistics.

mod clean;
pub mod emoji;
mod lemma;
mod stats;
mod tokenize;

pub use clean::{
    clean_text, is_excluded_tweet, normalize_reduplication, CleanRuleSet, EmoticonDict, DEFAULT_BOT_KEYWORDS,
    DEFAULT_EMOTICONS,
};
pub use lemma::{lemmatize, Lemmatizer, RuleLemmatizer};
pub use stats::{corpus_stats, CorpusStats};
pub use tokenize::{tokenize, Token, TokenKind};

use crate::corpus::TweetRecord;
use crate::delineate::RawTweet;

/// Clean → tokenize → lemmatize for one text.
pub struct Preprocessor {
    pub rules: CleanRuleSet,
    pub lemmatizer: Box<dyn Lemmatizer>,
}

impl Default for Preprocessor {
    fn default() -> Self {
        Preprocessor {
            rules: CleanRuleSet::default(),
            lemmatizer: Box::new(RuleLemmatizer::default()),
        }
    }
}

impl Preprocessor {
    pub fn new(rules: CleanRuleSet, lemmatizer: Box<dyn Lemmatizer>) -> Self {
        Preprocessor { rules, lemmatizer }
    }

    pub fn tokens(&self, raw: &str) -> (String, Vec<Token>) {
        let cleaned = clean_text(raw, &self.rules);
        let toks = tokenize(&cleaned, &self.rules.emoticons)
            .iter()
            .map(|t| lemmatize(t, self.lemmatizer.as_ref()))
            .collect();
        (cleaned, toks)
    }

    /// `None` when the tweet is excluded or nothing survives cleaning. The
    /// returned record keeps the original text in `raw`.
    pub fn process(&self, rec: &TweetRecord) -> Option<TweetRecord> {
        if is_excluded_tweet(&RawTweet::from_record(rec), &self.rules) {
            return None;
        }
        let (cleaned, toks) = self.tokens(&rec.text);
        if toks.is_empty() {
            return None;
        }
        Some(TweetRecord {
            text: cleaned,
            raw: Some(rec.raw.clone().unwrap_or_else(|| rec.text.clone())),
            tokens: Some(toks.into_iter().map(|t| t.lemma).collect()),
            ..rec.clone()
        })
    }
}
