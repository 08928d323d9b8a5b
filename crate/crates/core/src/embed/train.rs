use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicU32, AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::subword::word_buckets;
use super::{Embedding, EmbeddingParams};
use crate::error::{Error, Result};
use crate::stats::derived_rng;

/// Lexemes with count ≥ `min_count`, ordered by count descending then
/// lexeme ascending.
pub fn build_vocab<T, S>(sentences: &[T], min_count: u64) -> Vec<(String, u64)>
where
    T: AsRef<[S]>,
    S: AsRef<str>,
{
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for s in sentences {
        for t in s.as_ref() {
            *counts.entry(t.as_ref()).or_default() += 1;
        }
    }
    let mut v: Vec<(String, u64)> = counts
        .into_iter()
        .filter(|&(_, c)| c >= min_count)
        .map(|(w, c)| (w.to_string(), c))
        .collect();
    v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    v
}

/// Row storage for the two parameter matrices.
trait Store {
    fn read(&mut self, row: usize, out: &mut [f32]);
    fn add(&mut self, row: usize, delta: &[f32], scale: f32);
}

struct Dense {
    dim: usize,
    data: Vec<f32>,
}

impl Store for Dense {
    fn read(&mut self, row: usize, out: &mut [f32]) {
        out.copy_from_slice(&self.data[row * self.dim..(row + 1) * self.dim]);
    }

    fn add(&mut self, row: usize, delta: &[f32], scale: f32) {
        for (d, x) in self.data[row * self.dim..(row + 1) * self.dim].iter_mut().zip(delta) {
            *d += scale * x;
        }
    }
}

/// Shared storage for lock-free workers; concurrent updates may be lost,
/// which asynchronous SGD tolerates.
struct Shared {
    dim: usize,
    data: Vec<AtomicU32>,
}

impl Shared {
    fn from_dense(d: Dense) -> Self {
        Shared {
            dim: d.dim,
            data: d.data.into_iter().map(|x| AtomicU32::new(x.to_bits())).collect(),
        }
    }

    fn into_dense(self) -> Dense {
        Dense {
            dim: self.dim,
            data: self.data.into_iter().map(|a| f32::from_bits(a.into_inner())).collect(),
        }
    }
}

impl Store for &Shared {
    fn read(&mut self, row: usize, out: &mut [f32]) {
        for (o, a) in out.iter_mut().zip(&self.data[row * self.dim..(row + 1) * self.dim]) {
            *o = f32::from_bits(a.load(Ordering::Relaxed));
        }
    }

    fn add(&mut self, row: usize, delta: &[f32], scale: f32) {
        for (a, x) in self.data[row * self.dim..(row + 1) * self.dim].iter().zip(delta) {
            let cur = f32::from_bits(a.load(Ordering::Relaxed));
            a.store((cur + scale * x).to_bits(), Ordering::Relaxed);
        }
    }
}

struct Model<'a> {
    window: usize,
    negatives: usize,
    subwords: &'a [Vec<u32>],
    neg_table: &'a [u32],
    keep_prob: &'a [f32],
}

struct Scratch {
    hidden: Vec<f32>,
    grad: Vec<f32>,
    row: Vec<f32>,
    kept: Vec<u32>,
}

impl Scratch {
    fn new(dim: usize) -> Self {
        Scratch {
            hidden: vec![0.0; dim],
            grad: vec![0.0; dim],
            row: vec![0.0; dim],
            kept: Vec::new(),
        }
    }
}

fn sigmoid(x: f32) -> f32 {
    if x < -8.0 {
        0.0
    } else if x > 8.0 {
        1.0
    } else {
        1.0 / (1.0 + (-x).exp())
    }
}

impl Model<'_> {
    fn train_sentence<I: Store, O: Store>(
        &self,
        sentence: &[u32],
        lr: f32,
        rng: &mut ChaCha8Rng,
        input: &mut I,
        output: &mut O,
        s: &mut Scratch,
    ) {
        s.kept.clear();
        for &w in sentence {
            let p = self.keep_prob[w as usize];
            if p >= 1.0 || rng.random::<f32>() < p {
                s.kept.push(w);
            }
        }
        let kept = std::mem::take(&mut s.kept);
        for (pos, &center) in kept.iter().enumerate() {
            let b = rng.random_range(1..=self.window);
            let lo = pos.saturating_sub(b);
            let hi = (pos + b).min(kept.len() - 1);
            for c in lo..=hi {
                if c != pos {
                    self.update(center, kept[c], lr, rng, input, output, s);
                }
            }
        }
        s.kept = kept;
    }

    #[allow(clippy::too_many_arguments)]
    fn update<I: Store, O: Store>(
        &self,
        center: u32,
        target: u32,
        lr: f32,
        rng: &mut ChaCha8Rng,
        input: &mut I,
        output: &mut O,
        s: &mut Scratch,
    ) {
        let rows = &self.subwords[center as usize];
        s.hidden.iter_mut().for_each(|x| *x = 0.0);
        for &r in rows {
            input.read(r as usize, &mut s.row);
            for (h, x) in s.hidden.iter_mut().zip(&s.row) {
                *h += x;
            }
        }
        let inv = 1.0 / rows.len() as f32;
        s.hidden.iter_mut().for_each(|x| *x *= inv);
        s.grad.iter_mut().for_each(|x| *x = 0.0);

        for k in 0..=self.negatives {
            let (t, label) = if k == 0 {
                (target, 1.0f32)
            } else {
                let mut n = self.neg_table[rng.random_range(0..self.neg_table.len())];
                while n == target {
                    n = self.neg_table[rng.random_range(0..self.neg_table.len())];
                }
                (n, 0.0)
            };
            output.read(t as usize, &mut s.row);
            let dot: f32 = s.hidden.iter().zip(&s.row).map(|(a, b)| a * b).sum();
            let alpha = lr * (label - sigmoid(dot));
            for (g, o) in s.grad.iter_mut().zip(&s.row) {
                *g += alpha * o;
            }
            output.add(t as usize, &s.hidden, alpha);
        }
        for &r in rows {
            input.add(r as usize, &s.grad, 1.0);
        }
    }
}

/// Skip-gram with negative sampling over subword-composed input vectors.
/// With `workers == 1` the result is a pure function of corpus and params.
pub fn train<T, S>(sentences: &[T], params: &EmbeddingParams) -> Result<Embedding>
where
    T: AsRef<[S]> + Sync,
    S: AsRef<str>,
{
    params.validate()?;
    let vocab = build_vocab(sentences, params.min_count);
    if vocab.is_empty() {
        return Err(Error::Empty("embedding vocabulary (no lexeme meets min_count)"));
    }
    let dim = params.dim;
    let index: HashMap<&str, u32> = vocab.iter().enumerate().map(|(i, (w, _))| (w.as_str(), i as u32)).collect();
    let corpus: Vec<Vec<u32>> = sentences
        .iter()
        .map(|s| s.as_ref().iter().filter_map(|t| index.get(t.as_ref()).copied()).collect::<Vec<u32>>())
        .filter(|s| s.len() > 1)
        .collect();
    let total_tokens: u64 = vocab.iter().map(|(_, c)| c).sum();

    // input rows: one per word, then one per distinct bucket in ascending order
    let word_bucket_lists: Vec<Vec<u32>> = vocab
        .iter()
        .map(|(w, _)| word_buckets(w, params.minn, params.maxn, params.bucket_count))
        .collect();
    let mut bucket_row: BTreeMap<u32, u32> = BTreeMap::new();
    for list in &word_bucket_lists {
        for &b in list {
            bucket_row.insert(b, 0);
        }
    }
    let nwords = vocab.len();
    for (k, v) in bucket_row.values_mut().enumerate() {
        *v = (nwords + k) as u32;
    }
    let subwords: Vec<Vec<u32>> = word_bucket_lists
        .iter()
        .enumerate()
        .map(|(i, list)| std::iter::once(i as u32).chain(list.iter().map(|b| bucket_row[b])).collect())
        .collect();
    let nrows = nwords + bucket_row.len();

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let bound = 1.0 / dim as f32;
    let input = Dense {
        dim,
        data: (0..nrows * dim).map(|_| rng.random_range(-bound..bound)).collect(),
    };
    let output = Dense {
        dim,
        data: vec![0.0; nwords * dim],
    };

    let neg_table = negative_table(&vocab, params.neg_table_size);
    let keep_prob: Vec<f32> = vocab
        .iter()
        .map(|(_, c)| {
            if params.subsample <= 0.0 {
                return 1.0;
            }
            let f = *c as f64 / total_tokens as f64;
            let r = params.subsample / f;
            (r.sqrt() + r).min(1.0) as f32
        })
        .collect();
    let model = Model {
        window: params.window,
        negatives: params.negative_samples,
        subwords: &subwords,
        neg_table: &neg_table,
        keep_prob: &keep_prob,
    };
    let corpus_tokens: u64 = corpus.iter().map(|s| s.len() as u64).sum();
    let budget = (params.epochs as u64 * corpus_tokens).max(1) as f64;
    let lr0 = params.learning_rate;
    let lr_at = |done: u64| (lr0 * (1.0 - done as f64 / budget)).max(lr0 * 1e-4) as f32;

    let (input, _output) = if params.workers == 1 {
        let (mut input, mut output) = (input, output);
        let mut scratch = Scratch::new(dim);
        let mut done = 0u64;
        for _ in 0..params.epochs {
            for s in &corpus {
                model.train_sentence(s, lr_at(done), &mut rng, &mut input, &mut output, &mut scratch);
                done += s.len() as u64;
            }
        }
        (input, output)
    } else {
        let input = Shared::from_dense(input);
        let output = Shared::from_dense(output);
        let done = AtomicU64::new(0);
        let chunk = corpus.len().div_ceil(params.workers).max(1);
        std::thread::scope(|scope| {
            for (w, part) in corpus.chunks(chunk).enumerate() {
                let (model, input, output, done, lr_at) = (&model, &input, &output, &done, &lr_at);
                scope.spawn(move || {
                    let mut rng = derived_rng(params.seed, w as u64 + 1);
                    let mut scratch = Scratch::new(dim);
                    let (mut i, mut o) = (input, output);
                    for _ in 0..params.epochs {
                        for s in part {
                            let lr = lr_at(done.load(Ordering::Relaxed));
                            model.train_sentence(s, lr, &mut rng, &mut i, &mut o, &mut scratch);
                            done.fetch_add(s.len() as u64, Ordering::Relaxed);
                        }
                    }
                });
            }
        });
        (input.into_dense(), output.into_dense())
    };

    let mut word_vectors = vec![0.0f32; nwords * dim];
    for (i, rows) in subwords.iter().enumerate() {
        let dst = &mut word_vectors[i * dim..(i + 1) * dim];
        for &r in rows {
            let src = &input.data[r as usize * dim..(r as usize + 1) * dim];
            for (d, x) in dst.iter_mut().zip(src) {
                *d += x;
            }
        }
        let inv = 1.0 / rows.len() as f32;
        dst.iter_mut().for_each(|x| *x *= inv);
    }
    let ngram_vectors: BTreeMap<u32, Vec<f32>> = bucket_row
        .iter()
        .map(|(&b, &r)| (b, input.data[r as usize * dim..(r as usize + 1) * dim].to_vec()))
        .collect();
    let (words, counts) = vocab.into_iter().unzip();
    let emb = Embedding::from_parts(words, counts, dim, word_vectors, ngram_vectors, params.clone());
    if !emb.is_finite() {
        return Err(Error::Numerical("training diverged (non-finite vectors); lower the learning rate".into()));
    }
    Ok(emb)
}

/// Unigram^(3/4) table: word i occupies a share of slots proportional to
/// count^0.75, each word at least one slot.
fn negative_table(vocab: &[(String, u64)], size: usize) -> Vec<u32> {
    let z: f64 = vocab.iter().map(|(_, c)| (*c as f64).powf(0.75)).sum();
    let mut table = Vec::with_capacity(size + vocab.len());
    for (i, (_, c)) in vocab.iter().enumerate() {
        let slots = (((*c as f64).powf(0.75) / z) * size as f64).ceil().max(1.0) as usize;
        table.extend(std::iter::repeat_n(i as u32, slots));
    }
    table
}
