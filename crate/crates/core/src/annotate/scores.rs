use serde::{Deserialize, Serialize};

use super::schedule::PairKind;
use super::session::SessionState;
use crate::error::{Error, Result};
use crate::stats;

/// Scores sit on the inverted scale `4 − mean rating`, range [0, 3].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetScores {
    pub target: String,
    pub divergence: f64,
    pub divergence_se: f64,
    pub polysemy_left: f64,
    pub polysemy_left_se: f64,
    pub polysemy_right: f64,
    pub polysemy_right_se: f64,
    pub n_lr: usize,
    pub n_ll: usize,
    pub n_rr: usize,
}

pub const SCORES_TSV_HEADER: &str =
    "target\tdivergence\tdivergence_se\tpolysemy_left\tpolysemy_left_se\tpolysemy_right\tpolysemy_right_se";

pub const MISSING_LIST_LIMIT: usize = 20;

/// Mean over pairs of the per-pair annotator average, inverted; SE is the
/// sample sd of pair averages over √n (0 for a single pair).
fn inverted(pair_means: &[f64]) -> (f64, f64) {
    let m = stats::mean(pair_means).unwrap_or(f64::NAN);
    let se = stats::sd(pair_means).map_or(0.0, |s| s / (pair_means.len() as f64).sqrt());
    (4.0 - m, se)
}

pub fn session_scores(state: &SessionState, annotators: &[String]) -> Result<Vec<TargetScores>> {
    if annotators.is_empty() {
        return Err(Error::Empty("annotators"));
    }
    let missing = state.missing(annotators);
    if !missing.is_empty() {
        let shown: Vec<String> = missing
            .iter()
            .take(MISSING_LIST_LIMIT)
            .map(|(p, a)| format!("{p}/{a}"))
            .collect();
        let more = missing.len().saturating_sub(MISSING_LIST_LIMIT);
        let tail = if more > 0 { format!(" and {more} more") } else { String::new() };
        return Err(Error::Annotation(format!(
            "session incomplete, {} ratings missing: {}{tail}",
            missing.len(),
            shown.join(", ")
        )));
    }
    let mut out = Vec::with_capacity(state.schedule.targets.len());
    for target in &state.schedule.targets {
        let mut by_kind: [Vec<f64>; 3] = Default::default();
        for p in state.schedule.pairs.iter().filter(|p| &p.target == target) {
            let vals: Vec<f64> = annotators
                .iter()
                .map(|a| f64::from(state.rating(&p.pair_id, a).expect("completeness checked").value))
                .collect();
            let k = match p.kind {
                PairKind::LR => 0,
                PairKind::LL => 1,
                PairKind::RR => 2,
            };
            by_kind[k].push(stats::mean(&vals).expect("non-empty annotators"));
        }
        let (divergence, divergence_se) = inverted(&by_kind[0]);
        let (polysemy_left, polysemy_left_se) = inverted(&by_kind[1]);
        let (polysemy_right, polysemy_right_se) = inverted(&by_kind[2]);
        out.push(TargetScores {
            target: target.clone(),
            divergence,
            divergence_se,
            polysemy_left,
            polysemy_left_se,
            polysemy_right,
            polysemy_right_se,
            n_lr: by_kind[0].len(),
            n_ll: by_kind[1].len(),
            n_rr: by_kind[2].len(),
        });
    }
    Ok(out)
}

pub fn scores_tsv(scores: &[TargetScores]) -> String {
    let mut s = String::from(SCORES_TSV_HEADER);
    s.push('\n');
    for t in scores {
        s.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            t.target,
            t.divergence,
            t.divergence_se,
            t.polysemy_left,
            t.polysemy_left_se,
            t.polysemy_right,
            t.polysemy_right_se
        ));
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Agreement {
    /// `None` when either rater's ratings have zero variance.
    pub rho: Option<f64>,
    pub n: usize,
    pub flag: Option<String>,
}

pub const MIN_AGREEMENT_PAIRS: usize = 3;

/// Spearman's rho on aligned rating vectors (Pearson on midranks).
pub fn agreement(a: &[f64], b: &[f64]) -> Result<Agreement> {
    if a.len() != b.len() {
        return Err(Error::InvalidArgument(format!(
            "rating vectors differ in length ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    if a.len() < MIN_AGREEMENT_PAIRS {
        return Err(Error::Insufficient(format!(
            "{} shared pairs, at least {MIN_AGREEMENT_PAIRS} needed",
            a.len()
        )));
    }
    let constant = |x: &[f64]| x.iter().all(|v| *v == x[0]);
    if constant(a) || constant(b) {
        return Ok(Agreement {
            rho: None,
            n: a.len(),
            flag: Some("zero variance in one rater's ratings; rho undefined".into()),
        });
    }
    Ok(Agreement { rho: stats::spearman(a, b), n: a.len(), flag: None })
}

/// Both annotators must have rated exactly the same pairs.
pub fn session_agreement(state: &SessionState, a: &str, b: &str) -> Result<Agreement> {
    let mut xa = Vec::new();
    let mut xb = Vec::new();
    let mut mismatched = Vec::new();
    for p in &state.schedule.pairs {
        match (state.rating(&p.pair_id, a), state.rating(&p.pair_id, b)) {
            (Some(ra), Some(rb)) => {
                xa.push(f64::from(ra.value));
                xb.push(f64::from(rb.value));
            }
            (None, None) => {}
            _ => mismatched.push(p.pair_id.clone()),
        }
    }
    if !mismatched.is_empty() {
        return Err(Error::Annotation(format!(
            "`{a}` and `{b}` rated different pair sets; {} pairs rated by only one: {}",
            mismatched.len(),
            mismatched.iter().take(MISSING_LIST_LIMIT).cloned().collect::<Vec<_>>().join(", ")
        )));
    }
    agreement(&xa, &xb)
}
