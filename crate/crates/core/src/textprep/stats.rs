use std::collections::HashSet;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub token_count: u64,
    pub type_count: u64,
    pub ttr: f64,
    pub tweet_count: u64,
    pub user_count: u64,
    /// Set when there were no tokens and `ttr` is reported as 0.
    pub empty: bool,
}

/// Type/token statistics over per-tweet token (or lemma) lists.
pub fn corpus_stats<'a, I, T, S>(corpus: I) -> CorpusStats
where
    I: IntoIterator<Item = T>,
    T: IntoIterator<Item = &'a S>,
    S: AsRef<str> + ?Sized + 'a,
{
    let mut tokens = 0u64;
    let mut tweets = 0u64;
    let mut types: HashSet<&str> = HashSet::new();
    for tweet in corpus {
        tweets += 1;
        for tok in tweet {
            tokens += 1;
            types.insert(tok.as_ref());
        }
    }
    let type_count = types.len() as u64;
    CorpusStats {
        token_count: tokens,
        type_count,
        ttr: if tokens == 0 { 0.0 } else { type_count as f64 / tokens as f64 },
        tweet_count: tweets,
        user_count: 0,
        empty: tokens == 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_types_and_tokens() {
        let corpus = vec![vec!["the", "cat", "the"]];
        let s = corpus_stats(corpus.iter().map(|t| t.iter().copied()));
        assert_eq!(s.token_count, 3);
        assert_eq!(s.type_count, 2);
        assert!((s.ttr - 2.0 / 3.0).abs() < 1e-12);
        assert!(!s.empty);
    }

    #[test]
    fn empty_corpus_flagged() {
        let corpus: Vec<Vec<&str>> = vec![];
        let s = corpus_stats(corpus.iter().map(|t| t.iter().copied()));
        assert_eq!(s.token_count, 0);
        assert_eq!(s.ttr, 0.0);
        assert!(s.empty);
    }
}
