//! HTTP API over annotation sessions.
//!
//! `GET /api/session/{id}/next?annotator=A`, `POST /api/session/{id}/rating`
//! and `GET /api/session/{id}/scores`. Each session is opened once and
//! guarded by its own mutex, so its event log has a single writer.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::Utc;
use lexdiv::annotate::{session_dir, session_scores, Session, SCHEDULE_FILE};
use serde::Deserialize;
use serde_json::json;
use tower_http::services::ServeDir;

use crate::commands::files;
use crate::config::PipelineConfig;
use crate::error::{CliError, CliResult};

#[derive(Clone)]
pub struct AppState {
    root: PathBuf,
    sessions: Arc<Mutex<HashMap<String, Arc<Mutex<Session>>>>>,
}

impl AppState {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        AppState { root: root.into(), sessions: Arc::default() }
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, Response> {
        let mut map = self.sessions.lock().expect("session table");
        if let Some(s) = map.get(id) {
            return Ok(s.clone());
        }
        let dir = session_dir(&self.root, id).map_err(|e| fail(StatusCode::BAD_REQUEST, e.to_string()))?;
        if !dir.join(SCHEDULE_FILE).is_file() {
            return Err(fail(StatusCode::NOT_FOUND, format!("unknown session `{id}`")));
        }
        let s = Session::open(&self.root, id).map_err(|e| fail(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
        let s = Arc::new(Mutex::new(s));
        map.insert(id.to_string(), s.clone());
        Ok(s)
    }
}

fn fail(status: StatusCode, error: String) -> Response {
    (status, Json(json!({"ok": false, "error": error}))).into_response()
}

#[derive(Deserialize)]
struct NextQuery {
    annotator: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RatingBody {
    pair_id: String,
    annotator: String,
    value: i64,
}

fn annotator_ok(a: &str) -> bool {
    !a.trim().is_empty()
}

async fn next(State(app): State<AppState>, Path(id): Path<String>, Query(q): Query<NextQuery>) -> Response {
    let Some(annotator) = q.annotator.filter(|a| annotator_ok(a)) else {
        return fail(StatusCode::BAD_REQUEST, "missing annotator query parameter".into());
    };
    let s = match app.session(&id) {
        Ok(s) => s,
        Err(r) => return r,
    };
    let s = s.lock().expect("session");
    match s.state().next_pair(&annotator) {
        Some(view) => Json(view).into_response(),
        None => Json(json!({"done": true})).into_response(),
    }
}

async fn rating(State(app): State<AppState>, Path(id): Path<String>, body: Bytes) -> Response {
    let body: RatingBody = match serde_json::from_slice(&body) {
        Ok(b) => b,
        Err(e) => return fail(StatusCode::BAD_REQUEST, format!("bad rating body: {e}")),
    };
    if !annotator_ok(&body.annotator) {
        return fail(StatusCode::BAD_REQUEST, "annotator must be non-empty".into());
    }
    let s = match app.session(&id) {
        Ok(s) => s,
        Err(r) => return r,
    };
    let mut s = s.lock().expect("session");
    match s.record_rating(&body.pair_id, &body.annotator, body.value, Utc::now()) {
        Ok(_) => Json(json!({"ok": true})).into_response(),
        Err(e @ (lexdiv::Error::Io(_) | lexdiv::Error::IoPath { .. })) => {
            fail(StatusCode::INTERNAL_SERVER_ERROR, e.to_string())
        }
        Err(e) => fail(StatusCode::BAD_REQUEST, e.to_string()),
    }
}

async fn scores(State(app): State<AppState>, Path(id): Path<String>) -> Response {
    let s = match app.session(&id) {
        Ok(s) => s,
        Err(r) => return r,
    };
    let s = s.lock().expect("session");
    let annotators = s.state().annotators();
    if annotators.is_empty() {
        return fail(StatusCode::CONFLICT, "session has no ratings yet".into());
    }
    match session_scores(s.state(), &annotators) {
        Ok(v) => Json(v).into_response(),
        Err(e) => fail(StatusCode::CONFLICT, e.to_string()),
    }
}

/// Routes over sessions stored under `root`; static files from `web_root`
/// answer every other path.
pub fn router(root: impl Into<PathBuf>, web_root: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/session/{id}/next", get(next))
        .route("/api/session/{id}/rating", post(rating))
        .route("/api/session/{id}/scores", get(scores))
        .with_state(AppState::new(root));
    match web_root {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

pub fn serve(cfg: &PipelineConfig) -> CliResult<()> {
    let root = cfg.work(files::ANNOTATE_DIR);
    if let Some(w) = &cfg.paths.web_root {
        if !w.is_dir() {
            return Err(CliError::missing("web root", w));
        }
    }
    let app = router(root, cfg.paths.web_root.clone());
    let addr = format!("{}:{}", cfg.annotate.host, cfg.annotate.port);
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(&addr)
            .await
            .map_err(|e| CliError::Runtime(format!("cannot bind {addr}: {e}")))?;
        eprintln!("serving annotation sessions on http://{}", listener.local_addr()?);
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(())
    })
}
