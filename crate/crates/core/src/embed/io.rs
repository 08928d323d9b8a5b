use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Embedding, EmbeddingParams};
use crate::error::{Error, Result};
use crate::fsio::atomic_write;

const MAGIC: &[u8; 8] = b"LXDVNG1\n";

#[derive(Serialize, Deserialize)]
struct SidecarHeader {
    dim: usize,
    params: EmbeddingParams,
    counts: Vec<u64>,
    rows: usize,
}

/// `<path>.ngrams`
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".ngrams");
    PathBuf::from(s)
}

/// Text vectors (`|V| dim` header, then `lexeme v1 … v_dim`) plus a binary
/// sidecar holding n-gram rows, counts and params. Floats are written in
/// shortest round-trip form, so loading reproduces the embedding exactly.
pub fn save_embedding(emb: &Embedding, path: &Path) -> Result<()> {
    let mut text = String::with_capacity(emb.len() * emb.dim * 12);
    writeln!(text, "{} {}", emb.len(), emb.dim).expect("string write");
    for (i, w) in emb.words.iter().enumerate() {
        if w.is_empty() || w.chars().any(char::is_whitespace) {
            return Err(Error::InvalidArgument(format!("lexeme `{w}` cannot be written to the vector file")));
        }
        text.push_str(w);
        for x in emb.row(i) {
            write!(text, " {x}").expect("string write");
        }
        text.push('\n');
    }

    let header = serde_json::to_vec(&SidecarHeader {
        dim: emb.dim,
        params: emb.params.clone(),
        counts: emb.counts.clone(),
        rows: emb.ngram_vectors.len(),
    })?;
    let mut bin = Vec::with_capacity(16 + header.len() + emb.ngram_vectors.len() * (4 + 4 * emb.dim));
    bin.extend_from_slice(MAGIC);
    bin.extend_from_slice(&(header.len() as u32).to_le_bytes());
    bin.extend_from_slice(&header);
    for (b, row) in &emb.ngram_vectors {
        bin.extend_from_slice(&b.to_le_bytes());
        for x in row {
            bin.extend_from_slice(&x.to_le_bytes());
        }
    }
    atomic_write(&sidecar_path(path), &bin)?;
    atomic_write(path, text.as_bytes())
}

pub fn load_embedding(path: &Path) -> Result<Embedding> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io_at(path, e))?;
    let mut lines = text.lines();
    let head = lines.next().ok_or(Error::Empty("embedding file"))?;
    let parse_err = |line: usize, reason: String| Error::Parse { line, reason };
    let (n, dim) = head
        .split_once(' ')
        .and_then(|(a, b)| Some((a.parse::<usize>().ok()?, b.trim().parse::<usize>().ok()?)))
        .ok_or_else(|| parse_err(1, "expected `|V| dim` header".into()))?;
    let mut words = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n * dim);
    for (k, line) in lines.enumerate() {
        let mut parts = line.split(' ');
        let w = parts.next().unwrap_or_default();
        let before = vectors.len();
        for p in parts {
            vectors.push(p.parse::<f32>().map_err(|_| parse_err(k + 2, format!("bad float `{p}`")))?);
        }
        if vectors.len() - before != dim {
            return Err(parse_err(k + 2, format!("expected {dim} values")));
        }
        words.push(w.to_string());
    }
    if words.len() != n {
        return Err(parse_err(1, format!("header says {n} rows, found {}", words.len())));
    }

    let side = sidecar_path(path);
    let bin = std::fs::read(&side).map_err(|e| Error::io_at(&side, e))?;
    let corrupt = || Error::Parse {
        line: 0,
        reason: format!("corrupt sidecar {}", side.display()),
    };
    if bin.len() < 12 || &bin[..8] != MAGIC {
        return Err(corrupt());
    }
    let hlen = u32::from_le_bytes(bin[8..12].try_into().expect("4 bytes")) as usize;
    let header: SidecarHeader = serde_json::from_slice(bin.get(12..12 + hlen).ok_or_else(corrupt)?)?;
    if header.dim != dim || header.counts.len() != n {
        return Err(corrupt());
    }
    let mut off = 12 + hlen;
    let mut ngram_vectors = BTreeMap::new();
    let rec = 4 + 4 * dim;
    for _ in 0..header.rows {
        let chunk = bin.get(off..off + rec).ok_or_else(corrupt)?;
        let b = u32::from_le_bytes(chunk[..4].try_into().expect("4 bytes"));
        let row = chunk[4..]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect();
        ngram_vectors.insert(b, row);
        off += rec;
    }
    if off != bin.len() {
        return Err(corrupt());
    }
    Ok(Embedding::from_parts(words, header.counts, dim, vectors, ngram_vectors, header.params))
}
