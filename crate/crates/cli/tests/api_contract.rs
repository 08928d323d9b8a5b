//! Replays recorded request/response pairs against the annotation router.
//! `LEXDIV_RECORD_CONTRACT=1` rewrites the fixture from the live server.

use std::fs;
use std::path::{Path, PathBuf};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use chrono::{TimeZone, Utc};
use http_body_util::BodyExt;
use lexdiv::annotate::{build_session, Passage, Session, TargetPassages, EVENTS_FILE};
use lexdiv::Side;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tower::ServiceExt;

const FIXTURE: &str = "tests/fixtures/api_contract.json";
const SESSION: &str = "demo";
const TARGET: &str = "cat";
const SEED: u64 = 7;
const ANNOTATOR: &str = "ann1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RecordedRequest {
    method: String,
    path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    body: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RecordedResponse {
    status: u16,
    body: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Interaction {
    name: String,
    request: RecordedRequest,
    response: RecordedResponse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Contract {
    session: Value,
    interactions: Vec<Interaction>,
}

fn passage(side: Side, i: usize) -> Passage {
    let text = format!("{} the cat number {i} slept on a warm mat by the kitchen door", if i % 2 == 0 { "Today" } else { "Then" });
    let start = text.find("cat").unwrap();
    Passage {
        tweet_id: format!("{side}-{i}"),
        user_id: format!("{side}-user-{i}"),
        side,
        target: TARGET.into(),
        full_len: text.chars().count(),
        match_start: text[..start].chars().count(),
        match_len: 3,
        text_window: text,
    }
}

fn make_session(root: &Path) {
    let pools = vec![TargetPassages {
        target: TARGET.into(),
        left: (0..20).map(|i| passage(Side::Left, i)).collect(),
        right: (0..20).map(|i| passage(Side::Right, i)).collect(),
    }];
    let schedule = build_session(&pools, SEED).unwrap();
    Session::create(root, SESSION, schedule, Utc.with_ymd_and_hms(2021, 5, 1, 0, 0, 0).unwrap()).unwrap();
}

fn get(name: &str, path: &str) -> (String, RecordedRequest) {
    (name.into(), RecordedRequest { method: "GET".into(), path: path.into(), body: None })
}

fn post(name: &str, body: String) -> (String, RecordedRequest) {
    (
        name.into(),
        RecordedRequest { method: "POST".into(), path: format!("/api/session/{SESSION}/rating"), body: Some(body) },
    )
}

fn rating(pair: &str, value: i64) -> String {
    json!({"pair_id": pair, "annotator": ANNOTATOR, "value": value}).to_string()
}

async fn send(app: &axum::Router, req: &RecordedRequest) -> RecordedResponse {
    let mut b = Request::builder().method(req.method.as_str()).uri(&req.path);
    if req.body.is_some() {
        b = b.header("content-type", "application/json");
    }
    let r = app
        .clone()
        .oneshot(b.body(Body::from(req.body.clone().unwrap_or_default())).unwrap())
        .await
        .unwrap();
    let status = r.status().as_u16();
    let bytes = r.into_body().collect().await.unwrap().to_bytes();
    RecordedResponse { status, body: serde_json::from_slice(&bytes).unwrap_or(Value::Null) }
}

/// Walks the scripted session against a live router.
async fn record(app: &axum::Router) -> Vec<Interaction> {
    let next_path = format!("/api/session/{SESSION}/next?annotator={ANNOTATOR}");
    let scores_path = format!("/api/session/{SESSION}/scores");
    let mut out = Vec::new();
    let step = |out: &mut Vec<Interaction>, (name, request): (String, RecordedRequest), response| {
        out.push(Interaction { name, request, response });
    };
    let script = [
        get("next without annotator", &format!("/api/session/{SESSION}/next")),
        get("next on unknown session", &format!("/api/session/nosuch/next?annotator={ANNOTATOR}")),
        get("scores before any rating", &scores_path),
    ];
    for s in script {
        let r = send(app, &s.1).await;
        step(&mut out, s, r);
    }
    let first = get("first pair", &next_path);
    let r = send(app, &first.1).await;
    let p1 = r.body["pair_id"].as_str().unwrap().to_string();
    step(&mut out, first, r);
    let script = [
        post("rate first pair", rating(&p1, 3)),
        post("duplicate rating", rating(&p1, 2)),
        post("rating out of range", rating(&p1, 5)),
        post("unknown pair", rating("p999", 1)),
        post("missing value", json!({"pair_id": p1, "annotator": ANNOTATOR}).to_string()),
        post("unexpected field", json!({"pair_id": p1, "annotator": ANNOTATOR, "value": 1, "side": "left"}).to_string()),
        post("blank annotator", json!({"pair_id": p1, "annotator": " ", "value": 1}).to_string()),
        get("scores while incomplete", &scores_path),
    ];
    for s in script {
        let r = send(app, &s.1).await;
        step(&mut out, s, r);
    }
    let mut n = 1;
    loop {
        let next = get(&format!("next after {n} ratings"), &next_path);
        let r = send(app, &next.1).await;
        let done = r.body.get("done").is_some();
        let pair = r.body["pair_id"].as_str().map(str::to_string);
        step(&mut out, next, r);
        if done {
            break;
        }
        let value = 1 + (n as i64 % 4);
        let p = post(&format!("rating {}", n + 1), rating(&pair.unwrap(), value));
        let r = send(app, &p.1).await;
        step(&mut out, p, r);
        n += 1;
    }
    let s = get("scores when complete", &scores_path);
    let r = send(app, &s.1).await;
    step(&mut out, s, r);
    out
}

fn fixture_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(FIXTURE)
}

#[tokio::test]
async fn recorded_contract_replays() {
    let dir = tempfile::tempdir().unwrap();
    make_session(dir.path());
    let app = lexdiv_cli::server::router(dir.path(), None);
    let session = json!({"id": SESSION, "target": TARGET, "seed": SEED, "pairs": 40, "annotator": ANNOTATOR});

    if std::env::var_os("LEXDIV_RECORD_CONTRACT").is_some() {
        let c = Contract { session, interactions: record(&app).await };
        fs::write(fixture_path(), serde_json::to_string_pretty(&c).unwrap() + "\n").unwrap();
        return;
    }

    let c: Contract = serde_json::from_str(&fs::read_to_string(fixture_path()).unwrap()).unwrap();
    assert_eq!(c.session, session);
    for i in &c.interactions {
        let got = send(&app, &i.request).await;
        assert_eq!(got, i.response, "interaction `{}`", i.name);
    }

    let events = fs::read_to_string(dir.path().join(SESSION).join(EVENTS_FILE)).unwrap();
    assert_eq!(events.lines().filter(|l| l.contains("\"type\":\"rating\"")).count(), 40);
    let first: Value = serde_json::from_str(events.lines().next().unwrap()).unwrap();
    assert_eq!(first["type"], "session_created");
    assert!(first["ts"].is_string());
}

#[test]
fn contract_shapes() {
    let c: Contract = serde_json::from_str(&fs::read_to_string(fixture_path()).unwrap()).unwrap();
    let mut pairs = 0;
    let mut ok_posts = 0;
    for i in &c.interactions {
        let b = &i.response.body;
        match (i.request.method.as_str(), i.request.path.rsplit('/').next().unwrap()) {
            ("GET", p) if p.starts_with("next") => {
                if i.response.status == 200 && b.get("done").is_none() {
                    pairs += 1;
                    let keys: Vec<&str> = b.as_object().unwrap().keys().map(String::as_str).collect();
                    assert_eq!(keys, ["pair_id", "passage_a", "passage_b", "progress", "target"]);
                    assert_eq!(b["progress"]["total"], 40);
                    let text = b.to_string().to_lowercase();
                    assert!(!text.contains("left") && !text.contains("right"), "side label in `{}`", i.name);
                    for k in ["passage_a", "passage_b"] {
                        assert!(b[k].as_str().unwrap().to_lowercase().contains(TARGET));
                    }
                } else if i.response.status == 200 {
                    assert_eq!(*b, json!({"done": true}));
                } else {
                    assert_eq!(b["ok"], false);
                }
            }
            ("POST", "rating") => match i.response.status {
                200 => {
                    ok_posts += 1;
                    assert_eq!(*b, json!({"ok": true}));
                }
                400 => {
                    assert_eq!(b["ok"], false);
                    assert!(!b["error"].as_str().unwrap().is_empty());
                }
                s => panic!("unexpected rating status {s}"),
            },
            ("GET", "scores") => {
                if i.response.status == 200 {
                    let rows = b.as_array().unwrap();
                    assert_eq!(rows.len(), 1);
                    assert_eq!(rows[0]["target"], TARGET);
                    assert_eq!((rows[0]["n_lr"].clone(), rows[0]["n_ll"].clone(), rows[0]["n_rr"].clone()), (json!(20), json!(10), json!(10)));
                } else {
                    assert_eq!(i.response.status, StatusCode::CONFLICT.as_u16());
                }
            }
            other => panic!("unexpected request {other:?}"),
        }
    }
    assert_eq!(pairs, 40);
    assert_eq!(ok_posts, 40);
}
