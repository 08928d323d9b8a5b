use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Keyword {
    pub term: String,
    pub score: f64,
}

/// Each cluster's tokens form one document: tf = count / cluster tokens,
/// idf = ln(N_clusters / clusters containing the term) + 1. Top `k` per
/// cluster by tf·idf, ties broken lexicographically.
pub fn cluster_keywords<S: AsRef<str>>(clusters: &[Vec<S>], k: usize) -> Vec<Vec<Keyword>> {
    let counts: Vec<BTreeMap<&str, u64>> = clusters
        .iter()
        .map(|toks| {
            let mut m = BTreeMap::new();
            for t in toks {
                *m.entry(t.as_ref()).or_insert(0u64) += 1;
            }
            m
        })
        .collect();
    let mut df: HashMap<&str, u64> = HashMap::new();
    for m in &counts {
        for t in m.keys() {
            *df.entry(t).or_default() += 1;
        }
    }
    let n = clusters.len() as f64;
    counts
        .iter()
        .zip(clusters)
        .map(|(m, toks)| {
            let total = toks.len() as f64;
            let mut kw: Vec<Keyword> = m
                .iter()
                .map(|(t, &c)| Keyword {
                    term: t.to_string(),
                    score: (c as f64 / total) * ((n / df[t] as f64).ln() + 1.0),
                })
                .collect();
            kw.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.term.cmp(&b.term)));
            kw.truncate(k);
            kw
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exclusive_frequent_term_first() {
        let a = vec!["pizza", "pizza", "pizza", "good"];
        let b = vec!["vote", "good", "vote"];
        let kw = cluster_keywords(&[a, b], 5);
        assert_eq!(kw[0][0].term, "pizza");
        assert_eq!(kw[1][0].term, "vote");
    }

    #[test]
    fn shared_terms_rank_by_tf() {
        let a = vec!["x", "y", "y"];
        let b = vec!["x", "y"];
        let kw = cluster_keywords(&[a, b], 5);
        assert_eq!(kw[0][0].term, "y");
        assert!((kw[0][0].score - 2.0 / 3.0).abs() < 1e-15);
        // equal tf in b: lexicographic
        assert_eq!(kw[1][0].term, "x");
    }

    #[test]
    fn k_beyond_vocab_returns_all() {
        let kw = cluster_keywords(&[vec!["a", "b"]], 10);
        assert_eq!(kw[0].len(), 2);
    }
}
