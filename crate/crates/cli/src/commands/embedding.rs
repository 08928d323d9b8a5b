use std::path::Path;

use lexdiv::corpus::{Side, TweetRecord};
use lexdiv::embed::{
    align as align_pair, divergence_table, divergence_tsv, load_embedding, save_embedding, shared_vocab, sidecar_path,
    train, tune, AlignOptions, AlignedEmbeddingPair, Embedding, EmbeddingParams,
};
use lexdiv::lexstats::{eligible_lexicon, FrequencyTable};
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{files, json_bytes, read_clean};
use crate::artifacts::{Manifest, Stage};
use crate::config::PipelineConfig;
use crate::error::{CliError, CliResult};

fn sentences(recs: &[TweetRecord], side: Option<Side>) -> Vec<&[String]> {
    recs.iter()
        .filter(|r| side.is_none_or(|s| r.side == s))
        .map(|r| r.lemmas())
        .collect()
}

fn save(stage: &mut Stage, role: &str, emb: &Embedding, path: &Path) -> CliResult<()> {
    save_embedding(emb, path)?;
    stage.record_output(role, path)?;
    stage.record_output(&format!("{role} subwords"), &sidecar_path(path))
}

/// Trains left, right and pooled embeddings; `tune` first searches the
/// configured grid and trains with the best point.
pub fn embed(cfg: &PipelineConfig, tune_grid: bool) -> CliResult<Manifest> {
    let mut stage = Stage::begin(cfg, "embed", Some(cfg.embed.seed));
    let recs = read_clean(&mut stage, cfg)?;
    let left = sentences(&recs, Some(Side::Left));
    let right = sentences(&recs, Some(Side::Right));
    let all = sentences(&recs, None);

    let mut params: EmbeddingParams = cfg.embed.clone();
    if tune_grid {
        let table = FrequencyTable::build(&recs);
        let eligible = eligible_lexicon(&table, &cfg.align.profile());
        let outcome = tune(
            &cfg.tune.points(&cfg.embed),
            &left,
            &right,
            &eligible,
            AlignOptions { center: cfg.align.center },
        )?;
        stage.write("tuning trace", &cfg.work(files::EMBED_TUNE), &json_bytes(&outcome)?)?;
        params = outcome
            .best_params()
            .cloned()
            .ok_or_else(|| CliError::Runtime("no tuning grid point produced an alignment".into()))?;
    }

    let (l, r, a) = std::thread::scope(|s| {
        let hl = s.spawn(|| train(&left, &params));
        let hr = s.spawn(|| train(&right, &params));
        let a = train(&all, &params);
        (hl.join().expect("training thread"), hr.join().expect("training thread"), a)
    });
    let (l, r, a) = (l?, r?, a?);
    save(&mut stage, "left embedding", &l, &cfg.work(files::EMBED_LEFT))?;
    save(&mut stage, "right embedding", &r, &cfg.work(files::EMBED_RIGHT))?;
    save(&mut stage, "pooled embedding", &a, &cfg.work(files::EMBED_ALL))?;
    stage.set_details(json!({
        "params": params,
        "vocab": {"left": l.len(), "right": r.len(), "all": a.len()},
        "tuned": tune_grid,
    }));
    stage.finish()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentSummary {
    pub shared: usize,
    pub mean_self_similarity: f64,
    pub orthogonality_residual: f64,
    pub center: bool,
    pub shared_vocab: Vec<String>,
}

fn load_pair(stage: &mut Stage, cfg: &PipelineConfig) -> CliResult<(Embedding, Embedding)> {
    let mut load = |role: &str, rel: &str| -> CliResult<Embedding> {
        let p = stage.input(role, &cfg.work(rel))?;
        stage.input(&format!("{role} subwords"), &sidecar_path(&p))?;
        Ok(load_embedding(&p)?)
    };
    Ok((load("left embedding", files::EMBED_LEFT)?, load("right embedding", files::EMBED_RIGHT)?))
}

fn aligned(cfg: &PipelineConfig, l: Embedding, r: Embedding, shared: &[String]) -> CliResult<AlignedEmbeddingPair> {
    Ok(align_pair(l, r, shared, AlignOptions { center: cfg.align.center })?)
}

/// Rotates the right space onto the left over lexemes frequent on both sides.
pub fn align(cfg: &PipelineConfig) -> CliResult<Manifest> {
    let mut stage = Stage::begin(cfg, "align", None);
    let (l, r) = load_pair(&mut stage, cfg)?;
    let recs = read_clean(&mut stage, cfg)?;
    let eligible = eligible_lexicon(&FrequencyTable::build(&recs), &cfg.align.profile());
    let shared = shared_vocab(&l, &r, &eligible);
    let pair = aligned(cfg, l, r, &shared)?;
    let summary = AlignmentSummary {
        shared: shared.len(),
        mean_self_similarity: pair.mean_self_similarity,
        orthogonality_residual: pair.orthogonality_residual(),
        center: cfg.align.center,
        shared_vocab: shared,
    };
    stage.write("alignment", &cfg.work(files::ALIGNMENT), &json_bytes(&summary)?)?;
    stage.set_details(json!({"shared": summary.shared, "mean_self_similarity": summary.mean_self_similarity}));
    stage.finish()
}

/// Ranks the aligned vocabulary by cross-side cosine distance.
pub fn diverge(cfg: &PipelineConfig) -> CliResult<Manifest> {
    let mut stage = Stage::begin(cfg, "diverge", None);
    let (l, r) = load_pair(&mut stage, cfg)?;
    let summary: AlignmentSummary =
        serde_json::from_slice(&std::fs::read(stage.input("alignment", &cfg.work(files::ALIGNMENT))?)?)?;
    let recs = read_clean(&mut stage, cfg)?;
    let pair = aligned(cfg, l, r, &summary.shared_vocab)?;
    let rows = divergence_table(&pair, &FrequencyTable::build(&recs));
    stage.write("divergence ranking", &cfg.work(files::DIVERGENCE), divergence_tsv(&rows).as_bytes())?;
    stage.set_details(json!({"lexemes": rows.len()}));
    stage.finish()
}
