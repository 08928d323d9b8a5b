use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::schedule::{Pair, Schedule};
use crate::error::{Error, Result};

pub const SCHEDULE_FILE: &str = "schedule.json";
pub const EVENTS_FILE: &str = "events.jsonl";
pub const RATING_MIN: i64 = 1;
pub const RATING_MAX: i64 = 4;

/// One line of the session log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Event {
    SessionCreated {
        ts: DateTime<Utc>,
        session_id: String,
        seed: u64,
        pairs: usize,
    },
    Rating {
        ts: DateTime<Utc>,
        pair_id: String,
        annotator: String,
        value: u8,
    },
    /// Audit record of one chat-completion attempt.
    LlmExchange {
        ts: DateTime<Utc>,
        pair_id: String,
        annotator: String,
        attempt: u32,
        request: serde_json::Value,
        response: Option<String>,
        error: Option<String>,
    },
    MachineFailed {
        ts: DateTime<Utc>,
        pair_id: String,
        annotator: String,
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rating {
    pub pair_id: String,
    pub annotator: String,
    pub value: u8,
    pub ts: DateTime<Utc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Progress {
    pub done: usize,
    pub total: usize,
}

/// What an annotator sees: no side labels, no kind.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairView {
    pub pair_id: String,
    pub target: String,
    pub passage_a: String,
    pub passage_b: String,
    pub progress: Progress,
}

/// State derived purely from the schedule and the event sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionState {
    pub session_id: String,
    pub schedule: Schedule,
    /// pair_id → annotator → rating
    pub ratings: BTreeMap<String, BTreeMap<String, Rating>>,
    /// (pair_id, annotator) → reason
    pub failed: BTreeMap<(String, String), String>,
    pub exchanges: usize,
}

impl SessionState {
    pub fn new(session_id: &str, schedule: Schedule) -> SessionState {
        SessionState {
            session_id: session_id.to_string(),
            schedule,
            ratings: BTreeMap::new(),
            failed: BTreeMap::new(),
            exchanges: 0,
        }
    }

    pub fn replay(session_id: &str, schedule: Schedule, events: &[Event]) -> Result<SessionState> {
        let mut s = SessionState::new(session_id, schedule);
        for e in events {
            s.apply(e)?;
        }
        Ok(s)
    }

    fn known_pair(&self, pair_id: &str) -> Result<&Pair> {
        self.schedule
            .pair(pair_id)
            .ok_or_else(|| Error::Annotation(format!("unknown pair `{pair_id}`")))
    }

    pub fn check_rating(&self, pair_id: &str, annotator: &str, value: i64) -> Result<u8> {
        if !(RATING_MIN..=RATING_MAX).contains(&value) {
            return Err(Error::Annotation(format!(
                "rating {value} outside {RATING_MIN}..={RATING_MAX}"
            )));
        }
        if annotator.trim().is_empty() {
            return Err(Error::Annotation("annotator id is empty".into()));
        }
        self.known_pair(pair_id)?;
        if self.rating(pair_id, annotator).is_some() {
            return Err(Error::Annotation(format!(
                "annotator `{annotator}` already rated pair `{pair_id}`"
            )));
        }
        Ok(value as u8)
    }

    pub fn apply(&mut self, event: &Event) -> Result<()> {
        match event {
            Event::SessionCreated { session_id, seed, pairs, .. } => {
                if *session_id != self.session_id || *seed != self.schedule.seed || *pairs != self.schedule.pairs.len() {
                    return Err(Error::Annotation("event log does not belong to this schedule".into()));
                }
            }
            Event::Rating { ts, pair_id, annotator, value } => {
                let value = self.check_rating(pair_id, annotator, i64::from(*value))?;
                self.failed.remove(&(pair_id.clone(), annotator.clone()));
                self.ratings.entry(pair_id.clone()).or_default().insert(
                    annotator.clone(),
                    Rating { pair_id: pair_id.clone(), annotator: annotator.clone(), value, ts: *ts },
                );
            }
            Event::LlmExchange { pair_id, .. } => {
                self.known_pair(pair_id)?;
                self.exchanges += 1;
            }
            Event::MachineFailed { pair_id, annotator, reason, .. } => {
                self.known_pair(pair_id)?;
                self.failed.insert((pair_id.clone(), annotator.clone()), reason.clone());
            }
        }
        Ok(())
    }

    pub fn rating(&self, pair_id: &str, annotator: &str) -> Option<&Rating> {
        self.ratings.get(pair_id)?.get(annotator)
    }

    pub fn annotators(&self) -> Vec<String> {
        let mut v: Vec<String> = self.ratings.values().flat_map(|m| m.keys().cloned()).collect();
        v.sort();
        v.dedup();
        v
    }

    /// Pairs rated or machine-failed by this annotator.
    pub fn progress(&self, annotator: &str) -> Progress {
        let done = self
            .schedule
            .pairs
            .iter()
            .filter(|p| self.is_settled(&p.pair_id, annotator))
            .count();
        Progress { done, total: self.schedule.pairs.len() }
    }

    fn is_settled(&self, pair_id: &str, annotator: &str) -> bool {
        self.rating(pair_id, annotator).is_some()
            || self.failed.contains_key(&(pair_id.to_string(), annotator.to_string()))
    }

    pub fn next_pair(&self, annotator: &str) -> Option<PairView> {
        let p = self.schedule.pairs.iter().find(|p| !self.is_settled(&p.pair_id, annotator))?;
        Some(PairView {
            pair_id: p.pair_id.clone(),
            target: p.target.clone(),
            passage_a: p.passage_a.text_window.clone(),
            passage_b: p.passage_b.text_window.clone(),
            progress: self.progress(annotator),
        })
    }

    /// (pair_id, annotator) combinations still lacking a rating.
    pub fn missing(&self, annotators: &[String]) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for p in &self.schedule.pairs {
            for a in annotators {
                if self.rating(&p.pair_id, a).is_none() {
                    out.push((p.pair_id.clone(), a.clone()));
                }
            }
        }
        out
    }
}

/// A session on disk: `<root>/<id>/schedule.json` plus an append-only
/// `events.jsonl`. Only one `Session` value should write a given log.
#[derive(Debug)]
pub struct Session {
    pub dir: PathBuf,
    state: SessionState,
    log: File,
}

fn valid_id(id: &str) -> Result<()> {
    let ok = !id.is_empty()
        && id.len() <= 128
        && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("session id `{id}` must be [A-Za-z0-9_-]+")))
    }
}

pub fn session_dir(root: &Path, id: &str) -> Result<PathBuf> {
    valid_id(id)?;
    Ok(root.join(id))
}

pub fn read_events(path: &Path) -> Result<Vec<Event>> {
    let f = File::open(path).map_err(|e| Error::io_at(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| Error::io_at(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let e: Event = serde_json::from_str(&line)
            .map_err(|e| Error::Parse { line: i + 1, reason: e.to_string() })?;
        out.push(e);
    }
    Ok(out)
}

impl Session {
    pub fn create(root: &Path, id: &str, schedule: Schedule, ts: DateTime<Utc>) -> Result<Session> {
        let dir = session_dir(root, id)?;
        let events = dir.join(EVENTS_FILE);
        if events.exists() {
            return Err(Error::Annotation(format!("session `{id}` already exists at {}", dir.display())));
        }
        fs::create_dir_all(&dir).map_err(|e| Error::io_at(&dir, e))?;
        schedule.save(&dir.join(SCHEDULE_FILE))?;
        let log = OpenOptions::new()
            .create_new(true)
            .append(true)
            .open(&events)
            .map_err(|e| Error::io_at(&events, e))?;
        let created = Event::SessionCreated {
            ts,
            session_id: id.to_string(),
            seed: schedule.seed,
            pairs: schedule.pairs.len(),
        };
        let mut s = Session { dir, state: SessionState::new(id, schedule), log };
        s.append(created)?;
        Ok(s)
    }

    pub fn open(root: &Path, id: &str) -> Result<Session> {
        let dir = session_dir(root, id)?;
        let schedule = Schedule::load(&dir.join(SCHEDULE_FILE))?;
        let events_path = dir.join(EVENTS_FILE);
        let events = read_events(&events_path)?;
        if !matches!(events.first(), Some(Event::SessionCreated { .. })) {
            return Err(Error::Annotation("event log must start with session_created".into()));
        }
        let state = SessionState::replay(id, schedule, &events)?;
        let log = OpenOptions::new()
            .append(true)
            .open(&events_path)
            .map_err(|e| Error::io_at(&events_path, e))?;
        Ok(Session { dir, state, log })
    }

    pub fn state(&self) -> &SessionState {
        &self.state
    }

    pub fn events_path(&self) -> PathBuf {
        self.dir.join(EVENTS_FILE)
    }

    /// Validates against current state, then writes, then applies; a
    /// rejected event leaves both log and state untouched.
    pub fn append(&mut self, event: Event) -> Result<()> {
        let mut probe = self.state.clone();
        probe.apply(&event)?;
        let mut line = serde_json::to_vec(&event)?;
        line.push(b'\n');
        let path = self.events_path();
        self.log.write_all(&line).map_err(|e| Error::io_at(&path, e))?;
        self.log.flush().map_err(|e| Error::io_at(&path, e))?;
        self.log.sync_data().map_err(|e| Error::io_at(&path, e))?;
        self.state = probe;
        Ok(())
    }

    pub fn record_rating(
        &mut self,
        pair_id: &str,
        annotator: &str,
        value: i64,
        ts: DateTime<Utc>,
    ) -> Result<Progress> {
        let value = self.state.check_rating(pair_id, annotator, value)?;
        self.append(Event::Rating {
            ts,
            pair_id: pair_id.to_string(),
            annotator: annotator.to_string(),
            value,
        })?;
        Ok(self.state.progress(annotator))
    }
}
