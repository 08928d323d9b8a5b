use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, Mat};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub coords: Vec<[f64; 2]>,
    /// Variance along each of the two components.
    pub explained_variance: [f64; 2],
    pub total_variance: f64,
    pub components: [Vec<f64>; 2],
}

/// Mean-centered PCA onto the top two principal axes; each axis is signed
/// so its largest-magnitude loading is positive.
pub fn project_2d(vectors: &[Vec<f64>]) -> Result<Projection> {
    let n = vectors.len();
    if n < 3 {
        return Err(Error::Insufficient(format!("projection needs at least 3 vectors, got {n}")));
    }
    let d = vectors[0].len();
    if d < 2 || vectors.iter().any(|v| v.len() != d) {
        return Err(Error::InvalidArgument("vectors must share a dimension of at least 2".into()));
    }
    let mut mean = vec![0.0; d];
    for v in vectors {
        for (m, x) in mean.iter_mut().zip(v) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut cov = Mat::zeros(d, d);
    for v in vectors {
        let c: Vec<f64> = v.iter().zip(&mean).map(|(x, m)| x - m).collect();
        for i in 0..d {
            for j in i..d {
                cov[(i, j)] += c[i] * c[j];
            }
        }
    }
    for i in 0..d {
        for j in i..d {
            let s = cov[(i, j)] / (n - 1) as f64;
            cov[(i, j)] = s;
            cov[(j, i)] = s;
        }
    }
    let total = cov.trace();
    if !(total > 0.0) {
        return Err(Error::Numerical("zero-variance data cannot be projected".into()));
    }
    let eig = symmetric_eigen(&cov)?;
    let mut comps: [Vec<f64>; 2] = [eig.vectors.col(0), eig.vectors.col(1)];
    for c in comps.iter_mut() {
        let lead = c.iter().copied().fold(0.0f64, |a, x| if x.abs() > a.abs() { x } else { a });
        if lead < 0.0 {
            c.iter_mut().for_each(|x| *x = -*x);
        }
    }
    let coords = vectors
        .iter()
        .map(|v| {
            let mut out = [0.0; 2];
            for (k, c) in comps.iter().enumerate() {
                out[k] = v.iter().zip(&mean).zip(c).map(|((x, m), w)| (x - m) * w).sum();
            }
            out
        })
        .collect();
    Ok(Projection {
        coords,
        explained_variance: [eig.values[0].max(0.0), eig.values[1].max(0.0)],
        total_variance: total,
        components: comps,
    })
}
