use std::collections::VecDeque;

use rayon::prelude::*;

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn neighbors(points: &[Vec<f64>], i: usize, eps2: f64) -> Vec<usize> {
    (0..points.len())
        .filter(|&j| dist2(&points[i], &points[j]) <= eps2)
        .collect()
}

/// Density clustering with Euclidean distance. A point is core when at
/// least `min_pts` points (itself included) lie within `eps`. Clusters are
/// numbered in order of their first core point; a border point joins the
/// first cluster that reaches it. `None` marks noise.
pub fn dbscan(points: &[Vec<f64>], eps: f64, min_pts: usize) -> Vec<Option<usize>> {
    let n = points.len();
    let eps2 = if eps.is_finite() { eps * eps } else { f64::INFINITY };
    let core: Vec<bool> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut c = 0;
            for p in points {
                if dist2(&points[i], p) <= eps2 {
                    c += 1;
                    if c >= min_pts {
                        return true;
                    }
                }
            }
            false
        })
        .collect();
    let mut labels: Vec<Option<usize>> = vec![None; n];
    let mut expanded = vec![false; n];
    let mut next = 0;
    for start in 0..n {
        if !core[start] || labels[start].is_some() {
            continue;
        }
        let id = next;
        next += 1;
        labels[start] = Some(id);
        let mut queue = VecDeque::from([start]);
        expanded[start] = true;
        while let Some(p) = queue.pop_front() {
            for q in neighbors(points, p, eps2) {
                if labels[q].is_none() {
                    labels[q] = Some(id);
                }
                if core[q] && !expanded[q] && labels[q] == Some(id) {
                    expanded[q] = true;
                    queue.push_back(q);
                }
            }
        }
    }
    labels
}

/// Elbow of the sorted k-th-nearest-neighbour distance curve: the point
/// farthest from the chord joining its ends. A heuristic starting value.
pub fn suggest_eps(points: &[Vec<f64>], k: usize) -> Option<f64> {
    if points.len() <= k || k == 0 {
        return None;
    }
    let mut kd: Vec<f64> = (0..points.len())
        .into_par_iter()
        .map(|i| {
            let mut d: Vec<f64> = points
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, p)| dist2(&points[i], p))
                .collect();
            d.select_nth_unstable_by(k - 1, f64::total_cmp);
            d[k - 1].sqrt()
        })
        .collect();
    kd.sort_by(f64::total_cmp);
    let n = kd.len();
    let (x0, y0, x1, y1) = (0.0, kd[0], (n - 1) as f64, kd[n - 1]);
    let len = ((x1 - x0).powi(2) + (y1 - y0).powi(2)).sqrt();
    if len == 0.0 {
        return Some(kd[0]);
    }
    let mut best = (0.0, kd[n - 1]);
    for (i, &y) in kd.iter().enumerate() {
        let d = ((y1 - y0) * i as f64 - (x1 - x0) * y + x1 * y0 - y1 * x0).abs() / len;
        if d > best.0 {
            best = (d, y);
        }
    }
    Some(best.1)
}
