//! Corpus map (document vectors, density clusters, cluster keywords, 2-D
//! projection) and the side classifier.

mod dbscan;
mod docvec;
mod keywords;
mod lda;
mod pca;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::Side;

pub use dbscan::{dbscan, suggest_eps};
pub use docvec::{doc_vector, DocVector, IdfTable};
pub use keywords::{cluster_keywords, Keyword};
pub use lda::{
    classifier_tsv, evaluate, fit_lda, score_predictions, Evaluation, LdaClassifier, SplitScore,
    CLASSIFIER_TSV_HEADER, DEFAULT_BOOTSTRAPS,
};
pub use pca::{project_2d, Projection};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterModel {
    /// Cluster id per tweet; `None` is noise.
    pub labels: BTreeMap<String, Option<usize>>,
    pub eps: f64,
    pub min_pts: usize,
    pub keywords: BTreeMap<usize, Vec<Keyword>>,
    /// Share of right-side members per cluster.
    pub red_share: BTreeMap<usize, f64>,
}

/// Clusters non-degenerate documents in ascending tweet-id order and
/// extracts `k` keywords per cluster from the members' tokens.
pub fn cluster<S: AsRef<str>>(
    docs: &[DocVector],
    tokens: &BTreeMap<String, Vec<S>>,
    eps: f64,
    min_pts: usize,
    k: usize,
) -> ClusterModel {
    let mut kept: Vec<&DocVector> = docs.iter().filter(|d| !d.degenerate).collect();
    kept.sort_by(|a, b| a.tweet_id.cmp(&b.tweet_id));
    let points: Vec<Vec<f64>> = kept.iter().map(|d| d.vector.clone()).collect();
    let labels = dbscan(&points, eps, min_pts);
    let n_clusters = labels.iter().flatten().max().map_or(0, |m| m + 1);
    let mut members: Vec<Vec<&str>> = vec![Vec::new(); n_clusters];
    let mut right = vec![0usize; n_clusters];
    let mut size = vec![0usize; n_clusters];
    for (d, l) in kept.iter().zip(&labels) {
        if let Some(c) = *l {
            size[c] += 1;
            if d.side == Side::Right {
                right[c] += 1;
            }
            if let Some(t) = tokens.get(&d.tweet_id) {
                members[c].extend(t.iter().map(|s| s.as_ref()));
            }
        }
    }
    let kw = cluster_keywords(&members, k);
    ClusterModel {
        labels: kept.iter().zip(&labels).map(|(d, l)| (d.tweet_id.clone(), *l)).collect(),
        eps,
        min_pts,
        keywords: kw.into_iter().enumerate().collect(),
        red_share: (0..n_clusters).map(|c| (c, right[c] as f64 / size[c] as f64)).collect(),
    }
}

pub const MAP_TSV_HEADER: &str = "tweet_id\tx\ty\tside\tcluster";
pub const KEYWORDS_TSV_HEADER: &str = "cluster\trank\tterm\tscore\tred_share";

/// Rows follow `docs`; noise prints as `noise`.
pub fn map_tsv(docs: &[&DocVector], coords: &[[f64; 2]], model: &ClusterModel) -> String {
    let mut s = String::from(MAP_TSV_HEADER);
    s.push('\n');
    for (d, c) in docs.iter().zip(coords) {
        let cl = match model.labels.get(&d.tweet_id).copied().flatten() {
            Some(id) => id.to_string(),
            None => "noise".to_string(),
        };
        s.push_str(&format!("{}\t{:.6}\t{:.6}\t{}\t{}\n", d.tweet_id, c[0], c[1], d.side, cl));
    }
    s
}

pub fn keywords_tsv(model: &ClusterModel) -> String {
    let mut s = String::from(KEYWORDS_TSV_HEADER);
    s.push('\n');
    for (c, kws) in &model.keywords {
        let share = model.red_share.get(c).copied().unwrap_or(0.0);
        for (rank, k) in kws.iter().enumerate() {
            s.push_str(&format!("{}\t{}\t{}\t{:.6}\t{:.6}\n", c, rank + 1, k.term, k.score, share));
        }
    }
    s
}
