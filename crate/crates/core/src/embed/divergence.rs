use serde::{Deserialize, Serialize};

use super::AlignedEmbeddingPair;
use crate::lexstats::FrequencyTable;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceRow {
    pub lexeme: String,
    pub distance: f64,
    pub user_share: f64,
    pub tweets_l: u64,
    pub tweets_r: u64,
}

/// Shared lexemes by descending cosine distance (ties by lexeme), joined
/// with frequency-table coverage; lexemes absent from the table get zeros.
pub fn divergence_table(pair: &AlignedEmbeddingPair, freq: &FrequencyTable) -> Vec<DivergenceRow> {
    let mut rows: Vec<DivergenceRow> = pair
        .shared_vocab
        .iter()
        .enumerate()
        .map(|(k, w)| {
            let s = freq.stats(w);
            DivergenceRow {
                lexeme: w.clone(),
                distance: pair.distance_at(k),
                user_share: s.as_ref().map_or(0.0, |s| s.user_share),
                tweets_l: s.as_ref().map_or(0, |s| s.tweets_left),
                tweets_r: s.as_ref().map_or(0, |s| s.tweets_right),
            }
        })
        .collect();
    rows.sort_by(|a, b| b.distance.total_cmp(&a.distance).then_with(|| a.lexeme.cmp(&b.lexeme)));
    rows
}

pub const DIVERGENCE_TSV_HEADER: &str = "lexeme\tdistance\tuser_share\ttweets_l\ttweets_r";

pub fn divergence_tsv(rows: &[DivergenceRow]) -> String {
    let mut s = String::from(DIVERGENCE_TSV_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&format!(
            "{}\t{:.6}\t{:.6}\t{}\t{}\n",
            r.lexeme, r.distance, r.user_share, r.tweets_l, r.tweets_r
        ));
    }
    s
}
