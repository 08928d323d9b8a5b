use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::corpus::Side;
use crate::embed::Embedding;

/// Document frequencies over a pooled corpus; idf = ln(N / df) + 1.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IdfTable {
    pub docs: u64,
    pub df: HashMap<String, u64>,
}

impl IdfTable {
    pub fn build<T, S>(docs: &[T]) -> Self
    where
        T: AsRef<[S]>,
        S: AsRef<str>,
    {
        let mut df: HashMap<String, u64> = HashMap::new();
        for d in docs {
            let uniq: HashSet<&str> = d.as_ref().iter().map(|t| t.as_ref()).collect();
            for t in uniq {
                *df.entry(t.to_string()).or_default() += 1;
            }
        }
        IdfTable {
            docs: docs.len() as u64,
            df,
        }
    }

    /// Unseen terms are treated as occurring in one document.
    pub fn idf(&self, term: &str) -> f64 {
        let df = self.df.get(term).copied().unwrap_or(1).max(1);
        (self.docs.max(1) as f64 / df as f64).ln() + 1.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocVector {
    pub tweet_id: String,
    pub vector: Vec<f64>,
    pub side: Side,
    /// No in-vocabulary token, or the weighted mean cancelled to zero.
    pub degenerate: bool,
}

/// IDF-weighted mean of in-vocabulary token vectors, length-normalized.
pub fn doc_vector<S: AsRef<str>>(
    tweet_id: &str,
    tokens: &[S],
    side: Side,
    embedding: &Embedding,
    idf: &IdfTable,
) -> DocVector {
    let mut acc = vec![0.0f64; embedding.dim];
    // mass bounds the norm of the sum; a tiny ratio means cancellation
    let mut mass = 0.0f64;
    for t in tokens {
        if let Some(v) = embedding.word_vector(t.as_ref()) {
            let w = idf.idf(t.as_ref());
            let mut vn = 0.0;
            for (a, &x) in acc.iter_mut().zip(v) {
                *a += w * x as f64;
                vn += (x as f64) * (x as f64);
            }
            mass += w * vn.sqrt();
        }
    }
    let norm = acc.iter().map(|x| x * x).sum::<f64>().sqrt();
    let degenerate = !(norm > 1e-9 * mass) || !norm.is_finite();
    if !degenerate {
        acc.iter_mut().for_each(|x| *x /= norm);
    }
    DocVector {
        tweet_id: tweet_id.to_string(),
        vector: acc,
        side,
        degenerate,
    }
}
