use std::collections::BTreeMap;

use lexdiv::corpus::{Side, TweetRecord};
use lexdiv::embed::{load_embedding, sidecar_path, Embedding};
use lexdiv::topics::{
    classifier_tsv, cluster, doc_vector, evaluate, keywords_tsv, map_tsv, project_2d, suggest_eps, DocVector, IdfTable,
};
use rayon::prelude::*;
use serde_json::json;

use super::{files, read_clean};
use crate::artifacts::{Manifest, Stage};
use crate::config::PipelineConfig;
use crate::error::{CliError, CliResult};

fn pooled(stage: &mut Stage, cfg: &PipelineConfig) -> CliResult<Embedding> {
    let p = stage.input("pooled embedding", &cfg.work(files::EMBED_ALL))?;
    stage.input("pooled embedding subwords", &sidecar_path(&p))?;
    Ok(load_embedding(&p)?)
}

/// Document vectors for every post, sorted by tweet id.
fn doc_vectors(recs: &[TweetRecord], emb: &Embedding) -> Vec<DocVector> {
    let docs: Vec<&[String]> = recs.iter().map(|r| r.lemmas()).collect();
    let idf = IdfTable::build(&docs);
    let mut out: Vec<DocVector> = recs
        .par_iter()
        .map(|r| doc_vector(&r.id, r.lemmas(), r.side, emb, &idf))
        .collect();
    out.sort_by(|a, b| a.tweet_id.cmp(&b.tweet_id));
    out
}

/// Density clusters over document vectors, their keywords and a 2-D map.
pub fn topics(cfg: &PipelineConfig) -> CliResult<Manifest> {
    let mut stage = Stage::begin(cfg, "topics", None);
    let emb = pooled(&mut stage, cfg)?;
    let recs = read_clean(&mut stage, cfg)?;
    let docs = doc_vectors(&recs, &emb);
    let kept: Vec<&DocVector> = docs.iter().filter(|d| !d.degenerate).collect();
    let points: Vec<Vec<f64>> = kept.iter().map(|d| d.vector.clone()).collect();
    let t = &cfg.topics;
    let (eps, suggested) = match t.eps {
        Some(e) => (e, false),
        None => (
            suggest_eps(&points, t.eps_k).ok_or_else(|| {
                CliError::Runtime(format!("too few documents ({}) to suggest eps; set topics.eps", points.len()))
            })?,
            true,
        ),
    };
    let tokens: BTreeMap<String, Vec<String>> =
        recs.iter().map(|r| (r.id.clone(), r.lemmas().to_vec())).collect();
    let model = cluster(&docs, &tokens, eps, t.min_pts, t.keywords);
    let proj = project_2d(&points)?;
    stage.write("topic map", &cfg.work(files::TOPIC_MAP), map_tsv(&kept, &proj.coords, &model).as_bytes())?;
    stage.write("cluster keywords", &cfg.work(files::TOPIC_KEYWORDS), keywords_tsv(&model).as_bytes())?;
    let noise = model.labels.values().filter(|l| l.is_none()).count();
    stage.set_details(json!({
        "documents": docs.len(),
        "degenerate": docs.len() - kept.len(),
        "eps": eps,
        "eps_suggested": suggested,
        "clusters": model.red_share.len(),
        "noise": noise,
        "explained_variance": proj.explained_variance,
        "total_variance": proj.total_variance,
    }));
    stage.finish()
}

/// Side classifier over document vectors with repeated 80/20 splits.
pub fn classify(cfg: &PipelineConfig) -> CliResult<Manifest> {
    let seed = cfg.seeds.classify;
    let mut stage = Stage::begin(cfg, "classify", Some(seed));
    let emb = pooled(&mut stage, cfg)?;
    let recs = read_clean(&mut stage, cfg)?;
    let docs = doc_vectors(&recs, &emb);
    let kept: Vec<&DocVector> = docs.iter().filter(|d| !d.degenerate).collect();
    let x: Vec<Vec<f64>> = kept.iter().map(|d| d.vector.clone()).collect();
    let y: Vec<Side> = kept.iter().map(|d| d.side).collect();
    let e = evaluate(&x, &y, cfg.topics.bootstraps, seed, cfg.topics.lambda)?;
    stage.write("classifier evaluation", &cfg.work(files::CLASSIFIER), classifier_tsv(&e).as_bytes())?;
    stage.set_details(json!({"documents": e.n, "accuracy": e.accuracy, "kappa": e.kappa}));
    stage.finish()
}
