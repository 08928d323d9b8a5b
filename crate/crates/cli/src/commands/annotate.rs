use chrono::Utc;
use lexdiv::annotate::{
    build_session, run_llm_session, sample_passages, scores_tsv, session_agreement, session_dir, session_scores,
    HttpChatClient, Session, TargetPassages, PASSAGES_PER_SIDE, SCHEDULE_FILE,
};
use lexdiv::corpus::Side;
use lexdiv::embed::fnv1a;
use serde_json::json;

use super::{files, json_bytes, read_clean};
use crate::artifacts::{Manifest, Stage};
use crate::config::PipelineConfig;
use crate::error::{CliError, CliResult};

pub const SCORES_FILE: &str = "scores.tsv";

/// Seed for one (target, side) draw, derived from the annotation seed.
pub fn passage_seed(seed: u64, target: &str, side: Side) -> u64 {
    seed ^ (u64::from(fnv1a(target)) << 1) ^ (side.index() as u64) << 40
}

fn session_id<'a>(cfg: &'a PipelineConfig, session: Option<&'a str>) -> &'a str {
    session.unwrap_or(&cfg.annotate.session)
}

/// Samples passages for each target and writes a new session's schedule
/// and event log.
pub fn annotate_build(cfg: &PipelineConfig, targets: &[String], session: Option<&str>) -> CliResult<Manifest> {
    let seed = cfg.seeds.annotate;
    let id = session_id(cfg, session);
    let targets: Vec<String> = if targets.is_empty() { cfg.annotate.targets.clone() } else { targets.to_vec() };
    if targets.is_empty() {
        return Err(CliError::Config("no annotation targets: set annotate.targets or pass --target".into()));
    }
    let mut stage = Stage::begin(cfg, "annotate build", Some(seed));
    let recs = read_clean(&mut stage, cfg)?;
    let rules = &cfg.annotate.sampling;
    let mut inputs = Vec::with_capacity(targets.len());
    for t in &targets {
        let draw = |side| sample_passages(&recs, t, side, PASSAGES_PER_SIDE, rules, passage_seed(seed, t, side));
        inputs.push(TargetPassages { target: t.clone(), left: draw(Side::Left)?, right: draw(Side::Right)? });
    }
    let schedule = build_session(&inputs, seed)?;
    let root = cfg.work(files::ANNOTATE_DIR);
    let s = Session::create(&root, id, schedule, Utc::now())?;
    let dir = session_dir(&root, id)?;
    stage.record_output("annotation schedule", &dir.join(SCHEDULE_FILE))?;
    stage.set_details(json!({
        "session": id,
        "targets": targets,
        "pairs": s.state().schedule.pairs.len(),
        "events": s.events_path(),
    }));
    stage.finish()
}

pub fn annotate_serve(cfg: &PipelineConfig) -> CliResult<()> {
    crate::server::serve(cfg)
}

fn open(cfg: &PipelineConfig, id: &str) -> CliResult<Session> {
    let root = cfg.work(files::ANNOTATE_DIR);
    let dir = session_dir(&root, id)?;
    if !dir.join(SCHEDULE_FILE).is_file() {
        return Err(CliError::missing("annotation session", &dir));
    }
    Ok(Session::open(&root, id)?)
}

/// Divergence and polysemy per target; every listed annotator (default:
/// everyone who rated) must have rated every pair.
pub fn annotate_score(cfg: &PipelineConfig, session: Option<&str>, annotators: &[String]) -> CliResult<Manifest> {
    let id = session_id(cfg, session);
    let mut stage = Stage::begin(cfg, "annotate score", None);
    let s = open(cfg, id)?;
    stage.input("annotation events", &s.events_path())?;
    let annotators = if annotators.is_empty() { s.state().annotators() } else { annotators.to_vec() };
    if annotators.is_empty() {
        return Err(CliError::Runtime(format!("session `{id}` has no ratings yet")));
    }
    let scores = session_scores(s.state(), &annotators)?;
    let dir = session_dir(&cfg.work(files::ANNOTATE_DIR), id)?;
    stage.write("annotation scores", &dir.join(SCORES_FILE), scores_tsv(&scores).as_bytes())?;
    stage.set_details(json!({"session": id, "annotators": annotators, "targets": scores.len()}));
    stage.finish()
}

/// Machine ratings from a chat-completion endpoint; the key is read from
/// the environment variable named by `llm.api_key_env`.
pub fn annotate_llm(cfg: &PipelineConfig, session: Option<&str>) -> CliResult<Manifest> {
    let id = session_id(cfg, session);
    let mut stage = Stage::begin(cfg, "annotate llm", None);
    let mut s = open(cfg, id)?;
    let client = HttpChatClient::from_env(&cfg.llm)?;
    let summary = run_llm_session(&mut s, &client, &cfg.llm)?;
    stage.set_details(json!({
        "session": id,
        "model": cfg.llm.model,
        "base_url": cfg.llm.base_url,
        "summary": summary,
    }));
    let manifest = stage.finish()?;
    if summary.failed > 0 {
        return Err(CliError::Runtime(format!(
            "{} of {} pairs failed after retries and are logged as machine failures; rerun to retry them",
            summary.failed,
            summary.failed + summary.rated
        )));
    }
    Ok(manifest)
}

/// Annotator ids are free text; anything outside `[A-Za-z0-9._-]` becomes `_`.
pub fn agreement_file(a: &str, b: &str) -> String {
    let safe = |s: &str| -> String {
        s.chars().map(|c| if c.is_ascii_alphanumeric() || "._-".contains(c) { c } else { '_' }).collect()
    };
    format!("agreement_{}_{}.json", safe(a), safe(b))
}

/// Spearman correlation between two annotators over commonly rated pairs.
pub fn annotate_agreement(cfg: &PipelineConfig, session: Option<&str>, a: &str, b: &str) -> CliResult<Manifest> {
    let id = session_id(cfg, session);
    let mut stage = Stage::begin(cfg, "annotate agreement", None);
    let s = open(cfg, id)?;
    stage.input("annotation events", &s.events_path())?;
    let ag = session_agreement(s.state(), a, b)?;
    let out = json!({"session": id, "annotator_a": a, "annotator_b": b, "agreement": ag});
    let dir = session_dir(&cfg.work(files::ANNOTATE_DIR), id)?;
    stage.write("annotator agreement", &dir.join(agreement_file(a, b)), &json_bytes(&out)?)?;
    stage.set_details(out);
    stage.finish()
}
