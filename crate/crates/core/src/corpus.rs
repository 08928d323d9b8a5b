//! Line-delimited tweet records shared by every stage of the pipeline.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }

    pub fn flip(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Side::Left => 0,
            Side::Right => 1,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "left" | "l" => Ok(Side::Left),
            "right" | "r" => Ok(Side::Right),
            other => Err(Error::InvalidArgument(format!("unknown side `{other}`"))),
        }
    }
}

/// One post. `tokens` is present once the record has been cleaned and
/// lemmatized; `raw` keeps the uncleaned text for sentiment scoring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub id: String,
    pub user: String,
    pub ts: DateTime<Utc>,
    pub side: Side,
    pub text: String,
    #[serde(default)]
    pub likes: u64,
    #[serde(default)]
    pub rts: u64,
    #[serde(default = "default_lang")]
    pub lang: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tokens: Option<Vec<String>>,
}

fn default_lang() -> String {
    "en".to_string()
}

impl TweetRecord {
    pub fn lemmas(&self) -> &[String] {
        self.tokens.as_deref().unwrap_or(&[])
    }

    /// Text for sentiment scoring: the raw channel when kept, else `text`.
    pub fn sentiment_text(&self) -> &str {
        self.raw.as_deref().unwrap_or(&self.text)
    }
}

pub fn read_jsonl(path: &Path) -> Result<Vec<TweetRecord>> {
    let file = File::open(path).map_err(|e| Error::io_at(path, e))?;
    read_jsonl_from(BufReader::new(file))
}

pub fn read_jsonl_from<R: BufRead>(reader: R) -> Result<Vec<TweetRecord>> {
    let mut out = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: TweetRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: n + 1,
            reason: e.to_string(),
        })?;
        out.push(rec);
    }
    Ok(out)
}

pub fn write_jsonl_to<W: Write>(mut writer: W, records: &[TweetRecord]) -> Result<()> {
    for rec in records {
        serde_json::to_writer(&mut writer, rec)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_jsonl(path: &Path, records: &[TweetRecord]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io_at(path, e))?;
    write_jsonl_to(BufWriter::new(file), records)
}

/// Splits a corpus into (left, right) record references, preserving order.
pub fn by_side(records: &[TweetRecord]) -> (Vec<&TweetRecord>, Vec<&TweetRecord>) {
    records.iter().partition(|r| r.side == Side::Left)
}
