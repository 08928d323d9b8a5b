use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Side;
use crate::error::{Error, Result};
use crate::linalg::{cholesky, cholesky_solve, dot, Mat};
use crate::stats::{derived_rng, mean, percentile};

/// Two-class linear discriminant: predicts Right when w·x > threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaClassifier {
    pub mean_left: Vec<f64>,
    pub mean_right: Vec<f64>,
    /// Pooled within-class covariance plus λI, row-major dim × dim.
    pub covariance: Vec<f64>,
    pub lambda: f64,
    pub priors: [f64; 2],
    pub weights: Vec<f64>,
    pub threshold: f64,
}

/// λ defaults to 1e−4 · trace(Σ) / dim.
pub fn fit_lda(x: &[Vec<f64>], y: &[Side], lambda: Option<f64>) -> Result<LdaClassifier> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument("vectors and labels differ in length".into()));
    }
    let d = x.first().map_or(0, |v| v.len());
    if d == 0 || x.iter().any(|v| v.len() != d) {
        return Err(Error::InvalidArgument("vectors must share a positive dimension".into()));
    }
    let mut sums = [vec![0.0; d], vec![0.0; d]];
    let mut n = [0usize; 2];
    for (v, s) in x.iter().zip(y) {
        n[s.index()] += 1;
        for (a, b) in sums[s.index()].iter_mut().zip(v) {
            *a += b;
        }
    }
    if n[0] == 0 || n[1] == 0 {
        return Err(Error::Insufficient("both classes must be present".into()));
    }
    let means: Vec<Vec<f64>> = (0..2).map(|c| sums[c].iter().map(|s| s / n[c] as f64).collect()).collect();
    let mut cov = Mat::zeros(d, d);
    for (v, s) in x.iter().zip(y) {
        let c: Vec<f64> = v.iter().zip(&means[s.index()]).map(|(a, m)| a - m).collect();
        for i in 0..d {
            for j in i..d {
                cov[(i, j)] += c[i] * c[j];
            }
        }
    }
    let dof = (x.len().saturating_sub(2)).max(1) as f64;
    for i in 0..d {
        for j in i..d {
            let s = cov[(i, j)] / dof;
            cov[(i, j)] = s;
            cov[(j, i)] = s;
        }
    }
    let lambda = lambda.unwrap_or(1e-4 * cov.trace() / d as f64);
    for i in 0..d {
        cov[(i, i)] += lambda;
    }
    let l = cholesky(&cov).map_err(|_| Error::Numerical("covariance singular after regularization".into()))?;
    let diff: Vec<f64> = means[1].iter().zip(&means[0]).map(|(r, l)| r - l).collect();
    let w = cholesky_solve(&l, &diff);
    let mid: Vec<f64> = means[1].iter().zip(&means[0]).map(|(r, l)| (r + l) / 2.0).collect();
    let total = (n[0] + n[1]) as f64;
    let priors = [n[0] as f64 / total, n[1] as f64 / total];
    let threshold = dot(&w, &mid) - (priors[1] / priors[0]).ln();
    if !threshold.is_finite() || w.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite discriminant".into()));
    }
    Ok(LdaClassifier {
        mean_left: means[0].clone(),
        mean_right: means[1].clone(),
        covariance: cov.as_slice().to_vec(),
        lambda,
        priors,
        weights: w,
        threshold,
    })
}

impl LdaClassifier {
    pub fn score(&self, v: &[f64]) -> f64 {
        dot(&self.weights, v) - self.threshold
    }

    pub fn predict(&self, v: &[f64]) -> Side {
        if self.score(v) > 0.0 {
            Side::Right
        } else {
            Side::Left
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitScore {
    pub accuracy: f64,
    pub kappa: f64,
    pub p_chance: f64,
}

/// Accuracy and Cohen's κ with chance agreement from the true and
/// predicted class marginals.
pub fn score_predictions(truth: &[Side], pred: &[Side]) -> SplitScore {
    let n = truth.len() as f64;
    let correct = truth.iter().zip(pred).filter(|(a, b)| a == b).count() as f64;
    let t_r = truth.iter().filter(|&&s| s == Side::Right).count() as f64 / n;
    let p_r = pred.iter().filter(|&&s| s == Side::Right).count() as f64 / n;
    let p_chance = t_r * p_r + (1.0 - t_r) * (1.0 - p_r);
    let accuracy = correct / n;
    let kappa = if p_chance < 1.0 {
        (accuracy - p_chance) / (1.0 - p_chance)
    } else {
        0.0
    };
    SplitScore {
        accuracy,
        kappa,
        p_chance,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub accuracy: f64,
    pub kappa: f64,
    pub accuracy_ci: (f64, f64),
    pub kappa_ci: (f64, f64),
    pub n: usize,
    pub splits: Vec<SplitScore>,
    pub seed: u64,
}

pub const DEFAULT_BOOTSTRAPS: usize = 100;

/// Repeated stratified 80/20 splits: fit on 80%, score on 20%. Reports
/// mean accuracy and κ with 2.5–97.5 percentile intervals.
pub fn evaluate(x: &[Vec<f64>], y: &[Side], bootstrap_n: usize, seed: u64, lambda: Option<f64>) -> Result<Evaluation> {
    if bootstrap_n == 0 {
        return Err(Error::InvalidArgument("bootstrap_n must be positive".into()));
    }
    let by_class: [Vec<usize>; 2] = [
        (0..y.len()).filter(|&i| y[i] == Side::Left).collect(),
        (0..y.len()).filter(|&i| y[i] == Side::Right).collect(),
    ];
    if by_class.iter().any(|c| c.len() < 5) {
        return Err(Error::Insufficient("each class needs at least 5 documents for 80/20 splits".into()));
    }
    let splits: Vec<SplitScore> = (0..bootstrap_n)
        .into_par_iter()
        .map(|b| -> Result<SplitScore> {
            let mut rng = derived_rng(seed, b as u64);
            let (mut train, mut test) = (Vec::new(), Vec::new());
            for class in &by_class {
                let mut idx = class.clone();
                idx.shuffle(&mut rng);
                let cut = ((idx.len() as f64) * 0.8).round() as usize;
                train.extend_from_slice(&idx[..cut]);
                test.extend_from_slice(&idx[cut..]);
            }
            train.sort_unstable();
            test.sort_unstable();
            let tx: Vec<Vec<f64>> = train.iter().map(|&i| x[i].clone()).collect();
            let ty: Vec<Side> = train.iter().map(|&i| y[i]).collect();
            let model = fit_lda(&tx, &ty, lambda)?;
            let truth: Vec<Side> = test.iter().map(|&i| y[i]).collect();
            let pred: Vec<Side> = test.iter().map(|&i| model.predict(&x[i])).collect();
            Ok(score_predictions(&truth, &pred))
        })
        .collect::<Result<_>>()?;
    let acc: Vec<f64> = splits.iter().map(|s| s.accuracy).collect();
    let kap: Vec<f64> = splits.iter().map(|s| s.kappa).collect();
    let ci = |v: &[f64]| (percentile(v, 2.5).expect("non-empty"), percentile(v, 97.5).expect("non-empty"));
    Ok(Evaluation {
        accuracy: mean(&acc).expect("non-empty"),
        kappa: mean(&kap).expect("non-empty"),
        accuracy_ci: ci(&acc),
        kappa_ci: ci(&kap),
        n: y.len(),
        splits,
        seed,
    })
}

pub const CLASSIFIER_TSV_HEADER: &str =
    "accuracy\tkappa\taccuracy_ci_low\taccuracy_ci_high\tkappa_ci_low\tkappa_ci_high\tn\tsplits";

pub fn classifier_tsv(e: &Evaluation) -> String {
    format!(
        "{CLASSIFIER_TSV_HEADER}\n{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{}\t{}\n",
        e.accuracy,
        e.kappa,
        e.accuracy_ci.0,
        e.accuracy_ci.1,
        e.kappa_ci.0,
        e.kappa_ci.1,
        e.n,
        e.splits.len()
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_means_classify_as_their_class() {
        let x: Vec<Vec<f64>> = (0..20)
            .map(|i| {
                let c = if i < 10 { 0.0 } else { 3.0 };
                vec![c + (i as f64 * 0.37).sin() * 0.2, c + (i as f64 * 0.91).cos() * 0.2]
            })
            .collect();
        let y: Vec<Side> = (0..20).map(|i| if i < 10 { Side::Left } else { Side::Right }).collect();
        let m = fit_lda(&x, &y, None).unwrap();
        assert_eq!(m.predict(&m.mean_left), Side::Left);
        assert_eq!(m.predict(&m.mean_right), Side::Right);
    }

    #[test]
    fn kappa_identity() {
        let t = [Side::Left, Side::Left, Side::Right, Side::Right, Side::Right];
        let p = [Side::Left, Side::Right, Side::Right, Side::Right, Side::Left];
        let s = score_predictions(&t, &p);
        assert_eq!(s.kappa, (s.accuracy - s.p_chance) / (1.0 - s.p_chance));
        assert!((s.accuracy - 0.6).abs() < 1e-15);
    }

    #[test]
    fn single_class_rejected() {
        let x = vec![vec![1.0], vec![2.0]];
        assert!(fit_lda(&x, &[Side::Left, Side::Left], None).is_err());
    }
}
