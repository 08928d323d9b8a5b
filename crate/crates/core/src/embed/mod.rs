//! Subword skip-gram embeddings per subcorpus, orthogonal alignment of the
//! two spaces, divergence ranking and hyperparameter search.

mod align;
mod divergence;
mod io;
mod subword;
mod train;
mod tune;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use align::{align, normalize_rows, procrustes, shared_vocab, AlignOptions, AlignedEmbeddingPair};
pub use divergence::{divergence_table, divergence_tsv, DivergenceRow, DIVERGENCE_TSV_HEADER};
pub use io::{load_embedding, save_embedding, sidecar_path};
pub use subword::{bucket_of, fnv1a, subword_ngrams, word_buckets};
pub use train::{build_vocab, train};
pub use tune::{tune, TuneOutcome, TunePoint};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbeddingParams {
    pub dim: usize,
    pub window: usize,
    pub min_count: u64,
    pub epochs: usize,
    pub negative_samples: usize,
    pub minn: usize,
    pub maxn: usize,
    pub learning_rate: f64,
    pub bucket_count: u32,
    pub seed: u64,
    /// Frequent-token subsampling threshold; 0 disables.
    pub subsample: f64,
    pub neg_table_size: usize,
    /// 1 is bit-reproducible; more runs lock-free asynchronous updates.
    pub workers: usize,
}

impl Default for EmbeddingParams {
    fn default() -> Self {
        EmbeddingParams {
            dim: 50,
            window: 5,
            min_count: 5,
            epochs: 5,
            negative_samples: 5,
            minn: 3,
            maxn: 5,
            learning_rate: 0.05,
            bucket_count: 2_000_000,
            seed: 1,
            subsample: 1e-4,
            neg_table_size: 10_000_000,
            workers: 1,
        }
    }
}

impl EmbeddingParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if self.dim < 2 {
            return bad("dim must be at least 2");
        }
        if self.window == 0 || self.epochs == 0 || self.negative_samples == 0 || self.min_count == 0 {
            return bad("window, epochs, negative_samples and min_count must be positive");
        }
        if self.minn == 0 || self.minn > self.maxn {
            return bad("subword bounds need 1 <= minn <= maxn");
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return bad("learning_rate must be positive");
        }
        if self.bucket_count == 0 || self.neg_table_size == 0 || self.workers == 0 {
            return bad("bucket_count, neg_table_size and workers must be positive");
        }
        if !(self.subsample >= 0.0) {
            return bad("subsample must be non-negative");
        }
        Ok(())
    }
}

/// Trained vectors. `word_vectors` row i is the final vector of `words[i]`
/// (own row averaged with its n-gram rows); `ngram_vectors` keeps the
/// buckets touched by the vocabulary for out-of-vocabulary lookups.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub words: Vec<String>,
    pub counts: Vec<u64>,
    pub vocab: HashMap<String, usize>,
    pub dim: usize,
    pub word_vectors: Vec<f32>,
    pub ngram_vectors: BTreeMap<u32, Vec<f32>>,
    pub params: EmbeddingParams,
}

impl Embedding {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn index(&self, word: &str) -> Option<usize> {
        self.vocab.get(word).copied()
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.word_vectors[i * self.dim..(i + 1) * self.dim]
    }

    pub fn word_vector(&self, word: &str) -> Option<&[f32]> {
        self.index(word).map(|i| self.row(i))
    }

    /// In-vocabulary vector, else the mean of the known n-gram rows.
    pub fn vector(&self, word: &str) -> Option<Vec<f32>> {
        if let Some(v) = self.word_vector(word) {
            return Some(v.to_vec());
        }
        let p = &self.params;
        let rows: Vec<&Vec<f32>> = word_buckets(word, p.minn, p.maxn, p.bucket_count)
            .into_iter()
            .filter_map(|b| self.ngram_vectors.get(&b))
            .collect();
        if rows.is_empty() {
            return None;
        }
        let mut out = vec![0.0f32; self.dim];
        for r in &rows {
            for (o, x) in out.iter_mut().zip(r.iter()) {
                *o += x;
            }
        }
        let n = rows.len() as f32;
        out.iter_mut().for_each(|x| *x /= n);
        Some(out)
    }

    /// Panics if `word_vectors` is not `words.len() × dim`.
    pub fn from_parts(
        words: Vec<String>,
        counts: Vec<u64>,
        dim: usize,
        word_vectors: Vec<f32>,
        ngram_vectors: BTreeMap<u32, Vec<f32>>,
        params: EmbeddingParams,
    ) -> Self {
        assert_eq!(word_vectors.len(), words.len() * dim, "vector matrix shape");
        assert_eq!(counts.len(), words.len(), "one count per word");
        let vocab = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        Embedding {
            words,
            counts,
            vocab,
            dim,
            word_vectors,
            ngram_vectors,
            params,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.word_vectors.iter().all(|x| x.is_finite())
            && self.ngram_vectors.values().all(|r| r.iter().all(|x| x.is_finite()))
    }

    pub fn cosine(&self, a: &str, b: &str) -> Option<f64> {
        let va: Vec<f64> = self.vector(a)?.iter().map(|&x| x as f64).collect();
        let vb: Vec<f64> = self.vector(b)?.iter().map(|&x| x as f64).collect();
        Some(crate::linalg::cosine(&va, &vb))
    }
}
