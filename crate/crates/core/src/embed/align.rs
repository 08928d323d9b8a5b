use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::Embedding;
use crate::error::{Error, Result};
use crate::linalg::{cosine, jacobi_svd, orthogonality_residual, Mat};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlignOptions {
    /// Subtract the shared-vocabulary mean after length normalization.
    pub center: bool,
}

impl Default for AlignOptions {
    fn default() -> Self {
        AlignOptions { center: true }
    }
}

/// Both embeddings plus the rotation Q mapping the right space onto the
/// left. Row k of `left_rows` and `right_rows` belongs to
/// `shared_vocab[k]`; `right_rows` are already mapped (b·Qᵀ).
#[derive(Debug, Clone)]
pub struct AlignedEmbeddingPair {
    pub left: Embedding,
    pub right: Embedding,
    pub shared_vocab: Vec<String>,
    pub rotation: Mat,
    pub left_rows: Mat,
    pub right_rows: Mat,
    pub mean_self_similarity: f64,
    pub options: AlignOptions,
}

impl AlignedEmbeddingPair {
    pub fn position(&self, lexeme: &str) -> Option<usize> {
        self.shared_vocab.iter().position(|w| w == lexeme)
    }

    /// 1 − cosine of the aligned vectors, in [0, 2].
    pub fn distance_at(&self, k: usize) -> f64 {
        1.0 - cosine(self.left_rows.row(k), self.right_rows.row(k))
    }

    pub fn distance(&self, lexeme: &str) -> Option<f64> {
        self.position(lexeme).map(|k| self.distance_at(k))
    }

    pub fn orthogonality_residual(&self) -> f64 {
        orthogonality_residual(&self.rotation)
    }
}

/// Lexemes in `eligible` present in both vocabularies, in `eligible` order.
pub fn shared_vocab<S: AsRef<str>>(left: &Embedding, right: &Embedding, eligible: &[S]) -> Vec<String> {
    let mut seen = HashSet::new();
    eligible
        .iter()
        .map(|s| s.as_ref())
        .filter(|w| left.index(w).is_some() && right.index(w).is_some() && seen.insert(*w))
        .map(str::to_string)
        .collect()
}

/// Q = U·Vᵀ from the SVD of AᵀB; minimizes ‖A·Q − B‖_F over orthogonal Q.
pub fn procrustes(a: &Mat, b: &Mat) -> Result<Mat> {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(Error::InvalidArgument("procrustes inputs differ in shape".into()));
    }
    let m = a.t_matmul(b);
    let svd = jacobi_svd(&m)?;
    Ok(svd.u.matmul(&svd.v.transpose()))
}

/// Unit-length rows, then optional centering over rows.
pub fn normalize_rows(m: &mut Mat, center: bool) {
    for i in 0..m.rows() {
        let row = m.row_mut(i);
        let n = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.0 {
            row.iter_mut().for_each(|x| *x /= n);
        }
    }
    if center && m.rows() > 0 {
        let mut mean = vec![0.0; m.cols()];
        for i in 0..m.rows() {
            for (acc, x) in mean.iter_mut().zip(m.row(i)) {
                *acc += x;
            }
        }
        let n = m.rows() as f64;
        mean.iter_mut().for_each(|x| *x /= n);
        for i in 0..m.rows() {
            for (x, mu) in m.row_mut(i).iter_mut().zip(&mean) {
                *x -= mu;
            }
        }
    }
}

fn gather(e: &Embedding, vocab: &[String]) -> Mat {
    let mut m = Mat::zeros(vocab.len(), e.dim);
    for (k, w) in vocab.iter().enumerate() {
        let src = e.word_vector(w).expect("shared lexeme present");
        for (d, &x) in m.row_mut(k).iter_mut().zip(src) {
            *d = x as f64;
        }
    }
    m
}

/// Aligns `right` onto `left` over `shared`; mean self-similarity is the
/// average cosine between each lexeme's two aligned vectors.
pub fn align(left: Embedding, right: Embedding, shared: &[String], options: AlignOptions) -> Result<AlignedEmbeddingPair> {
    if shared.is_empty() {
        return Err(Error::Empty("shared vocabulary"));
    }
    if left.dim != right.dim {
        return Err(Error::InvalidArgument(format!("dimension mismatch: {} vs {}", left.dim, right.dim)));
    }
    if let Some(w) = shared.iter().find(|w| left.index(w).is_none() || right.index(w).is_none()) {
        return Err(Error::InvalidArgument(format!("`{w}` missing from one embedding")));
    }
    let mut a = gather(&left, shared);
    let mut b = gather(&right, shared);
    normalize_rows(&mut a, options.center);
    normalize_rows(&mut b, options.center);
    let scale = (shared.len() as f64).sqrt();
    if a.frobenius() <= 1e-9 * scale || b.frobenius() <= 1e-9 * scale {
        return Err(Error::Numerical("degenerate vectors: all shared lexemes coincide".into()));
    }
    let q = procrustes(&a, &b)?;
    let residual = orthogonality_residual(&q);
    if residual > 1e-6 {
        return Err(Error::Numerical(format!("rotation not orthogonal (residual {residual:e})")));
    }
    let mapped = b.matmul(&q.transpose());
    let mean_self_similarity =
        (0..shared.len()).map(|k| cosine(a.row(k), mapped.row(k))).sum::<f64>() / shared.len() as f64;
    Ok(AlignedEmbeddingPair {
        left,
        right,
        shared_vocab: shared.to_vec(),
        rotation: q,
        left_rows: a,
        right_rows: mapped,
        mean_self_similarity,
        options,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quarter_turn() {
        let a = Mat::from_rows(&[[1.0, 0.0], [0.0, 1.0]]);
        let b = Mat::from_rows(&[[0.0, 1.0], [-1.0, 0.0]]);
        let q = procrustes(&a, &b).unwrap();
        assert!(q.sub(&b).frobenius() < 1e-12);
    }

    #[test]
    fn rank_deficient_cross_covariance_still_orthogonal() {
        let a = Mat::from_rows(&[[1.0, 0.0, 0.0], [2.0, 0.0, 0.0]]);
        let b = Mat::from_rows(&[[0.0, 1.0, 0.0], [0.0, 2.0, 0.0]]);
        let q = procrustes(&a, &b).unwrap();
        assert!(orthogonality_residual(&q) < 1e-12);
        let aq = a.matmul(&q);
        assert!(aq.sub(&b).frobenius() < 1e-12);
    }
}
