use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Side;
use crate::error::{Error, Result};
use crate::linalg::{cholesky, cholesky_solve, dot, Mat};
use crate::stats::{derived_rng, permutation_p, weighted_mean};

pub const DEFAULT_PERMUTATIONS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    /// Permutation p-value; `None` for the intercept.
    pub p_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub slope: f64,
    pub intercept: f64,
    pub interaction: Option<f64>,
    /// For the slope, or for the interaction term when fitted.
    pub p_value: f64,
    pub r_squared: f64,
    pub n: usize,
    pub coefficients: Vec<Coefficient>,
    pub permutations: usize,
    pub seed: u64,
    /// Users dropped for zero followers.
    pub excluded_zero_followers: usize,
    /// Users dropped for undefined mean sentiment.
    pub excluded_undefined: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UserMean {
    pub side: Side,
    pub mean: f64,
    /// Scored tweet count.
    pub weight: f64,
}

fn group_means(users: &[UserMean], right: &[bool]) -> (f64, f64) {
    let (mut sl, mut wl, mut sr, mut wr) = (0.0, 0.0, 0.0, 0.0);
    for (u, &r) in users.iter().zip(right) {
        if r {
            sr += u.weight * u.mean;
            wr += u.weight;
        } else {
            sl += u.weight * u.mean;
            wl += u.weight;
        }
    }
    (sl / wl, sr / wr)
}

/// Right-minus-left difference of tweet-weighted user means (the WLS fit
/// of user means on a side indicator), with a label-shuffle p-value.
pub fn side_effect(users: &[UserMean], permutations: usize, seed: u64) -> Result<RegressionResult> {
    let right: Vec<bool> = users.iter().map(|u| u.side == Side::Right).collect();
    let n_right = right.iter().filter(|&&r| r).count();
    let n_left = users.len() - n_right;
    if n_left < 2 || n_right < 2 {
        return Err(Error::Insufficient(format!(
            "side effect needs at least 2 users per side, got {n_left} left and {n_right} right"
        )));
    }
    if users.iter().any(|u| !(u.weight > 0.0) || !u.mean.is_finite()) {
        return Err(Error::InvalidArgument("user weights must be positive and means finite".into()));
    }
    let (ml, mr) = group_means(users, &right);
    let beta = mr - ml;

    let ys: Vec<f64> = users.iter().map(|u| u.mean).collect();
    let ws: Vec<f64> = users.iter().map(|u| u.weight).collect();
    let ybar = weighted_mean(&ys, &ws).expect("positive weights");
    let sst: f64 = users.iter().map(|u| u.weight * (u.mean - ybar).powi(2)).sum();
    let (wl, wr) = users.iter().zip(&right).fold((0.0, 0.0), |(l, r), (u, &is_r)| {
        if is_r {
            (l, r + u.weight)
        } else {
            (l + u.weight, r)
        }
    });
    let ssb = wl * (ml - ybar).powi(2) + wr * (mr - ybar).powi(2);
    let r_squared = if sst > 0.0 { (ssb / sst).clamp(0.0, 1.0) } else { 0.0 };

    let null: Vec<f64> = (0..permutations)
        .into_par_iter()
        .map(|i| {
            let mut rng = derived_rng(seed, i as u64);
            let mut labels = right.clone();
            labels.shuffle(&mut rng);
            let (l, r) = group_means(users, &labels);
            r - l
        })
        .collect();
    let p = permutation_p(beta, &null);

    Ok(RegressionResult {
        slope: beta,
        intercept: ml,
        interaction: None,
        p_value: p,
        r_squared,
        n: users.len(),
        coefficients: vec![
            Coefficient {
                name: "intercept".into(),
                estimate: ml,
                p_value: None,
            },
            Coefficient {
                name: "side_right".into(),
                estimate: beta,
                p_value: Some(p),
            },
        ],
        permutations,
        seed,
        excluded_zero_followers: 0,
        excluded_undefined: 0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PopularityPoint {
    pub followers: u64,
    pub mean: Option<f64>,
    pub side: Side,
}

/// Least squares solver reusing one factorization across permuted responses.
struct Solver {
    x: Mat,
    l: Mat,
}

impl Solver {
    fn new(x: Mat) -> Result<Self> {
        let l = cholesky(&x.t_matmul(&x)).map_err(|_| Error::Numerical("singular design matrix".into()))?;
        Ok(Solver { x, l })
    }

    fn coef(&self, y: &[f64]) -> Vec<f64> {
        let p = self.x.cols();
        let mut xty = vec![0.0; p];
        for r in 0..self.x.rows() {
            for (a, v) in self.x.row(r).iter().enumerate() {
                xty[a] += v * y[r];
            }
        }
        cholesky_solve(&self.l, &xty)
    }

    fn fitted(&self, coef: &[f64]) -> Vec<f64> {
        (0..self.x.rows()).map(|r| dot(self.x.row(r), coef)).collect()
    }
}

fn drop_column(x: &Mat, j: usize) -> Mat {
    let rows: Vec<Vec<f64>> = (0..x.rows())
        .map(|r| {
            x.row(r)
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != j)
                .map(|(_, &v)| v)
                .collect()
        })
        .collect();
    Mat::from_rows(&rows)
}

/// Freedman–Lane: permute residuals of the model without column `j`, add
/// them back to its fitted values, refit the full model.
fn freedman_lane(full: &Solver, y: &[f64], j: usize, observed: f64, permutations: usize, seed: u64) -> Result<f64> {
    let reduced = Solver::new(drop_column(&full.x, j))?;
    let rc = reduced.coef(y);
    let fitted = reduced.fitted(&rc);
    let resid: Vec<f64> = y.iter().zip(&fitted).map(|(a, b)| a - b).collect();
    let null: Vec<f64> = (0..permutations)
        .into_par_iter()
        .map(|i| {
            let mut rng = derived_rng(seed, ((j as u64) << 48) | i as u64);
            let mut e = resid.clone();
            e.shuffle(&mut rng);
            let ystar: Vec<f64> = fitted.iter().zip(&e).map(|(f, e)| f + e).collect();
            full.coef(&ystar)[j]
        })
        .collect();
    Ok(permutation_p(observed, &null))
}

/// OLS of mean sentiment on log₁₀(followers), optionally with side and
/// side × log₁₀(followers) terms. Zero-follower and undefined users are
/// dropped and counted.
pub fn popularity_regression(
    points: &[PopularityPoint],
    with_interaction: bool,
    permutations: usize,
    seed: u64,
) -> Result<RegressionResult> {
    let mut zero = 0;
    let mut undefined = 0;
    let mut rows = Vec::new();
    let mut ys = Vec::new();
    for p in points {
        let Some(m) = p.mean else {
            undefined += 1;
            continue;
        };
        if p.followers == 0 {
            zero += 1;
            continue;
        }
        let x = (p.followers as f64).log10();
        let r = if p.side == Side::Right { 1.0 } else { 0.0 };
        rows.push(if with_interaction {
            vec![1.0, x, r, r * x]
        } else {
            vec![1.0, x]
        });
        ys.push(m);
    }
    if ys.len() < 3 {
        return Err(Error::Insufficient(format!(
            "popularity regression needs at least 3 users, got {}",
            ys.len()
        )));
    }
    let names: &[&str] = if with_interaction {
        &["intercept", "log10_followers", "side_right", "side_right:log10_followers"]
    } else {
        &["intercept", "log10_followers"]
    };
    if ys.len() <= names.len() && with_interaction {
        return Err(Error::Insufficient("too few users for the interaction model".into()));
    }
    let solver = Solver::new(Mat::from_rows(&rows))?;
    let coef = solver.coef(&ys);
    let fitted = solver.fitted(&coef);
    let ybar = ys.iter().sum::<f64>() / ys.len() as f64;
    let tss: f64 = ys.iter().map(|y| (y - ybar).powi(2)).sum();
    let rss: f64 = ys.iter().zip(&fitted).map(|(y, f)| (y - f).powi(2)).sum();
    let r_squared = if tss <= 1e-24 * ys.len() as f64 {
        0.0
    } else {
        (1.0 - rss / tss).clamp(0.0, 1.0)
    };

    let mut coefficients = Vec::with_capacity(names.len());
    for (j, name) in names.iter().enumerate() {
        let p_value = if j == 0 {
            None
        } else {
            Some(freedman_lane(&solver, &ys, j, coef[j], permutations, seed)?)
        };
        coefficients.push(Coefficient {
            name: name.to_string(),
            estimate: coef[j],
            p_value,
        });
    }
    let headline = if with_interaction { 3 } else { 1 };
    Ok(RegressionResult {
        slope: coef[1],
        intercept: coef[0],
        interaction: with_interaction.then(|| coef[3]),
        p_value: coefficients[headline].p_value.expect("non-intercept"),
        r_squared,
        n: ys.len(),
        coefficients,
        permutations,
        seed,
        excluded_zero_followers: zero,
        excluded_undefined: undefined,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn um(side: Side, mean: f64) -> UserMean {
        UserMean { side, mean, weight: 1.0 }
    }

    #[test]
    fn constructed_difference() {
        let mut users: Vec<_> = (0..5).map(|_| um(Side::Left, 0.5)).collect();
        users.extend((0..5).map(|_| um(Side::Right, 0.43)));
        let r = side_effect(&users, 200, 1).unwrap();
        assert!((r.slope + 0.07).abs() < 1e-12);
        assert!((r.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_users() {
        let users = vec![um(Side::Left, 0.1), um(Side::Right, 0.2), um(Side::Right, 0.3)];
        assert!(side_effect(&users, 10, 1).is_err());
    }

    #[test]
    fn antisymmetric_and_reproducible() {
        let users: Vec<_> = (0..12)
            .map(|i| UserMean {
                side: if i % 3 == 0 { Side::Right } else { Side::Left },
                mean: (i as f64 * 0.37).sin(),
                weight: 1.0 + i as f64,
            })
            .collect();
        let flipped: Vec<_> = users.iter().map(|u| UserMean { side: u.side.flip(), ..*u }).collect();
        let a = side_effect(&users, 500, 9).unwrap();
        let b = side_effect(&flipped, 500, 9).unwrap();
        assert_eq!(a.slope, -b.slope);
        let a2 = side_effect(&users, 500, 9).unwrap();
        assert_eq!(a.p_value, a2.p_value);
    }

    #[test]
    fn exact_fit_popularity() {
        let pts: Vec<_> = [10u64, 100, 1000, 10_000, 50]
            .iter()
            .map(|&f| PopularityPoint {
                followers: f,
                mean: Some(0.06 * (f as f64).log10() + 0.1),
                side: Side::Left,
            })
            .collect();
        let r = popularity_regression(&pts, false, 100, 3).unwrap();
        assert!((r.slope - 0.06).abs() < 1e-12);
        assert!((r.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_response_and_exclusions() {
        let mut pts: Vec<_> = [10u64, 100, 1000, 10_000]
            .iter()
            .map(|&f| PopularityPoint {
                followers: f,
                mean: Some(0.3),
                side: Side::Right,
            })
            .collect();
        pts.push(PopularityPoint {
            followers: 0,
            mean: Some(0.9),
            side: Side::Left,
        });
        pts.push(PopularityPoint {
            followers: 5,
            mean: None,
            side: Side::Left,
        });
        let r = popularity_regression(&pts, false, 100, 3).unwrap();
        assert!(r.slope.abs() < 1e-12);
        assert_eq!(r.r_squared, 0.0);
        assert_eq!((r.excluded_zero_followers, r.excluded_undefined, r.n), (1, 1, 4));
        assert!(popularity_regression(&pts[..2], false, 10, 3).is_err());
    }

    #[test]
    fn interaction_model_recovers_terms() {
        let pts: Vec<_> = (0..40u64)
            .map(|i| {
                let f = 10u64.pow((i % 5) as u32 + 1) + i;
                let side = if i % 2 == 0 { Side::Left } else { Side::Right };
                let x = (f as f64).log10();
                let r = if side == Side::Right { 1.0 } else { 0.0 };
                PopularityPoint {
                    followers: f,
                    mean: Some(0.1 + 0.05 * x - 0.2 * r + 0.03 * r * x),
                    side,
                }
            })
            .collect();
        let r = popularity_regression(&pts, true, 200, 4).unwrap();
        assert!((r.interaction.unwrap() - 0.03).abs() < 1e-9);
        assert!((r.coefficients[2].estimate + 0.2).abs() < 1e-9);
        assert!(r.p_value < 0.05);
    }
}
