use serde::{Deserialize, Serialize};

use super::{align, shared_vocab, train, AlignOptions, EmbeddingParams};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TunePoint {
    pub params: EmbeddingParams,
    pub objective: Option<f64>,
    pub shared: usize,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneOutcome {
    /// Index into `trace` of the highest objective; the first wins ties.
    pub best: Option<usize>,
    pub trace: Vec<TunePoint>,
}

impl TuneOutcome {
    pub fn best_params(&self) -> Option<&EmbeddingParams> {
        self.best.map(|i| &self.trace[i].params)
    }
}

/// Trains both sides per grid point, aligns over `eligible` ∩ both
/// vocabularies and scores by mean self-similarity. Failures are recorded
/// per point.
pub fn tune<T, S, E>(
    grid: &[EmbeddingParams],
    left: &[T],
    right: &[T],
    eligible: &[E],
    options: AlignOptions,
) -> Result<TuneOutcome>
where
    T: AsRef<[S]> + Sync,
    S: AsRef<str>,
    E: AsRef<str>,
{
    if grid.is_empty() {
        return Err(Error::Empty("tuning grid"));
    }
    let mut trace = Vec::with_capacity(grid.len());
    for params in grid {
        let point = (|| -> Result<(f64, usize)> {
            let l = train(left, params)?;
            let r = train(right, params)?;
            let shared = shared_vocab(&l, &r, eligible);
            let n = shared.len();
            let pair = align(l, r, &shared, options)?;
            Ok((pair.mean_self_similarity, n))
        })();
        trace.push(match point {
            Ok((obj, n)) => TunePoint {
                params: params.clone(),
                objective: Some(obj),
                shared: n,
                error: None,
            },
            Err(e) => TunePoint {
                params: params.clone(),
                objective: None,
                shared: 0,
                error: Some(e.to_string()),
            },
        });
    }
    let mut best: Option<usize> = None;
    for (i, p) in trace.iter().enumerate() {
        if let Some(o) = p.objective {
            if best.is_none_or(|b| o > trace[b].objective.expect("scored")) {
                best = Some(i);
            }
        }
    }
    Ok(TuneOutcome { best, trace })
}
