use std::time::Duration;

use chrono::Utc;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::schedule::Pair;
use super::session::{Event, Session};
use crate::error::{Error, Result};

/// Instruction text sent ahead of the two passages. Must not be edited.
pub const DUREL_PROMPT: &str = "The target words in <x> tags in sentences A and B are spelled the same, but their meaning in context may be similar or unrelated (homonymy counts as unrelated, like bat the animal and bat in baseball). Rate meaning similarity, considering if they refer to the same object/concept. Ignore any etymological and metaphorical connections! Ignore case! Ignore number (cat/Cats = identical meaning). Output rating as: 1 = unrelated; 2 = distantly related; 3 = closely related; 4 = identical meaning.";

pub const DEFAULT_API_KEY_ENV: &str = "LEXDIV_LLM_API_KEY";

/// Endpoint settings. The key itself never lives here: only the name of the
/// environment variable that holds it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LlmConfig {
    pub base_url: String,
    pub model: String,
    pub api_key_env: String,
    pub retries: u32,
    pub temperature: f64,
    pub timeout_secs: u64,
    pub concurrency: usize,
}

impl Default for LlmConfig {
    fn default() -> Self {
        LlmConfig {
            base_url: "https://api.openai.com/v1".into(),
            model: "gpt-4o".into(),
            api_key_env: DEFAULT_API_KEY_ENV.into(),
            retries: 3,
            temperature: 0.0,
            timeout_secs: 60,
            concurrency: 4,
        }
    }
}

impl LlmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.model.trim().is_empty() {
            return Err(Error::InvalidArgument("llm.model is empty".into()));
        }
        if self.retries == 0 {
            return Err(Error::InvalidArgument("llm.retries must be at least 1".into()));
        }
        if self.concurrency == 0 {
            return Err(Error::InvalidArgument("llm.concurrency must be at least 1".into()));
        }
        Ok(())
    }
}

pub fn build_prompt(pair: &Pair) -> String {
    format!(
        "{DUREL_PROMPT}\n\nA: {}\nB: {}",
        pair.passage_a.marked("<x>", "</x>"),
        pair.passage_b.marked("<x>", "</x>")
    )
}

pub fn request_body(cfg: &LlmConfig, prompt: &str) -> serde_json::Value {
    json!({
        "model": cfg.model,
        "temperature": cfg.temperature,
        "messages": [{"role": "user", "content": prompt}],
    })
}

/// Sends a chat-completion body and returns the assistant text.
pub trait ChatClient: Send + Sync {
    fn complete(&self, body: &serde_json::Value) -> Result<String>;
}

/// Any endpoint speaking the `/chat/completions` JSON shape.
pub struct HttpChatClient {
    url: String,
    key: Option<String>,
    http: reqwest::blocking::Client,
}

impl HttpChatClient {
    /// Reads the key from the configured environment variable; a missing
    /// variable means unauthenticated requests.
    pub fn from_env(cfg: &LlmConfig) -> Result<HttpChatClient> {
        let key = std::env::var(&cfg.api_key_env).ok().filter(|k| !k.is_empty());
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(cfg.timeout_secs))
            .build()
            .map_err(|e| Error::Http(e.to_string()))?;
        Ok(HttpChatClient {
            url: format!("{}/chat/completions", cfg.base_url.trim_end_matches('/')),
            key,
            http,
        })
    }
}

impl ChatClient for HttpChatClient {
    fn complete(&self, body: &serde_json::Value) -> Result<String> {
        let mut req = self.http.post(&self.url).json(body);
        if let Some(k) = &self.key {
            req = req.bearer_auth(k);
        }
        let resp = req.send().map_err(|e| Error::Http(e.to_string()))?;
        let status = resp.status();
        let text = resp.text().map_err(|e| Error::Http(e.to_string()))?;
        if !status.is_success() {
            return Err(Error::Http(format!("status {status}: {text}")));
        }
        let v: serde_json::Value = serde_json::from_str(&text)?;
        v["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| Error::Http(format!("no message content in response: {text}")))
    }
}

/// Offline client: answers from a function of the prompt and the 0-based
/// attempt number for that prompt.
pub struct StubClient<F>
where
    F: Fn(&str, u32) -> Result<String> + Send + Sync,
{
    respond: F,
    attempts: std::sync::Mutex<std::collections::HashMap<String, u32>>,
}

impl<F> StubClient<F>
where
    F: Fn(&str, u32) -> Result<String> + Send + Sync,
{
    pub fn new(respond: F) -> Self {
        StubClient { respond, attempts: Default::default() }
    }
}

impl<F> ChatClient for StubClient<F>
where
    F: Fn(&str, u32) -> Result<String> + Send + Sync,
{
    fn complete(&self, body: &serde_json::Value) -> Result<String> {
        let prompt = body["messages"][0]["content"].as_str().unwrap_or_default().to_string();
        let attempt = {
            let mut m = self.attempts.lock().expect("stub lock");
            let n = m.entry(prompt.clone()).or_insert(0);
            *n += 1;
            *n - 1
        };
        (self.respond)(&prompt, attempt)
    }
}

/// First digit run of length one whose value is 1–4.
pub fn parse_rating(response: &str) -> Option<u8> {
    let chars: Vec<char> = response.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i - start == 1 && ('1'..='4').contains(&chars[start]) {
                return chars[start].to_digit(10).map(|d| d as u8);
            }
        } else {
            i += 1;
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exchange {
    pub attempt: u32,
    pub request: serde_json::Value,
    pub response: Option<String>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LlmOutcome {
    Rated(u8),
    Failed(String),
}

/// Up to `cfg.retries` attempts; transport errors and unparseable replies
/// both consume an attempt.
pub fn llm_rate(client: &dyn ChatClient, pair: &Pair, cfg: &LlmConfig) -> (LlmOutcome, Vec<Exchange>) {
    let body = request_body(cfg, &build_prompt(pair));
    let mut log = Vec::new();
    let mut last = String::new();
    for attempt in 0..cfg.retries {
        match client.complete(&body) {
            Ok(text) => {
                let parsed = parse_rating(&text);
                log.push(Exchange { attempt, request: body.clone(), response: Some(text.clone()), error: None });
                if let Some(v) = parsed {
                    return (LlmOutcome::Rated(v), log);
                }
                last = format!("unparseable response: {text:?}");
            }
            Err(e) => {
                last = e.to_string();
                log.push(Exchange { attempt, request: body.clone(), response: None, error: Some(last.clone()) });
            }
        }
    }
    (LlmOutcome::Failed(format!("MACHINE_FAILED after {} attempts: {last}", cfg.retries)), log)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LlmRunSummary {
    pub rated: usize,
    pub failed: usize,
    pub skipped: usize,
}

/// Rates every pair the model has not rated yet. Requests run concurrently
/// (bounded by `cfg.concurrency`); results are logged in presentation order.
pub fn run_llm_session(session: &mut Session, client: &dyn ChatClient, cfg: &LlmConfig) -> Result<LlmRunSummary> {
    cfg.validate()?;
    let annotator = cfg.model.clone();
    let todo: Vec<Pair> = session
        .state()
        .schedule
        .pairs
        .iter()
        .filter(|p| session.state().rating(&p.pair_id, &annotator).is_none())
        .cloned()
        .collect();
    let skipped = session.state().schedule.pairs.len() - todo.len();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.concurrency)
        .build()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let results: Vec<(LlmOutcome, Vec<Exchange>)> =
        pool.install(|| todo.par_iter().map(|p| llm_rate(client, p, cfg)).collect());
    let mut summary = LlmRunSummary { skipped, ..Default::default() };
    for (pair, (outcome, exchanges)) in todo.iter().zip(results) {
        for x in exchanges {
            session.append(Event::LlmExchange {
                ts: Utc::now(),
                pair_id: pair.pair_id.clone(),
                annotator: annotator.clone(),
                attempt: x.attempt,
                request: x.request,
                response: x.response,
                error: x.error,
            })?;
        }
        match outcome {
            LlmOutcome::Rated(v) => {
                session.record_rating(&pair.pair_id, &annotator, i64::from(v), Utc::now())?;
                summary.rated += 1;
            }
            LlmOutcome::Failed(reason) => {
                session.append(Event::MachineFailed {
                    ts: Utc::now(),
                    pair_id: pair.pair_id.clone(),
                    annotator: annotator.clone(),
                    reason,
                })?;
                summary.failed += 1;
            }
        }
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_contract() {
        assert_eq!(parse_rating("3"), Some(3));
        assert_eq!(parse_rating("Rating: 2 because…"), Some(2));
        assert_eq!(parse_rating("maybe"), None);
        assert_eq!(parse_rating("10 or 12, say 4"), Some(4));
        assert_eq!(parse_rating("5 then 1"), Some(1));
        assert_eq!(parse_rating("4."), Some(4));
    }
}
