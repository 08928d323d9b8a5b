use std::collections::HashMap;
use std::fmt;
use std::io::BufRead;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Five-way outlet bias category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BiasCategory {
    Left,
    LeanLeft,
    Center,
    LeanRight,
    Right,
}

impl BiasCategory {
    pub const ALL: [BiasCategory; 5] = [
        BiasCategory::Left,
        BiasCategory::LeanLeft,
        BiasCategory::Center,
        BiasCategory::LeanRight,
        BiasCategory::Right,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BiasCategory::Left => "left",
            BiasCategory::LeanLeft => "lean_left",
            BiasCategory::Center => "center",
            BiasCategory::LeanRight => "lean_right",
            BiasCategory::Right => "right",
        }
    }

    pub fn is_left_pole(self) -> bool {
        self == BiasCategory::Left
    }

    pub fn is_right_pole(self) -> bool {
        matches!(self, BiasCategory::LeanRight | BiasCategory::Right)
    }
}

impl fmt::Display for BiasCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BiasCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s
            .trim()
            .chars()
            .filter(|c| !matches!(c, ' ' | '_' | '-'))
            .collect::<String>()
            .to_lowercase();
        match norm.as_str() {
            "left" => Ok(BiasCategory::Left),
            "leanleft" => Ok(BiasCategory::LeanLeft),
            "center" | "centre" => Ok(BiasCategory::Center),
            "leanright" => Ok(BiasCategory::LeanRight),
            "right" => Ok(BiasCategory::Right),
            _ => Err(Error::InvalidArgument(format!("unknown bias category `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutletEntry {
    pub account_id: String,
    pub display_name: String,
    pub category: BiasCategory,
    pub follower_count: u64,
}

/// Seed news accounts with their bias category. Account ids are unique and
/// both poles are non-empty.
#[derive(Debug, Clone)]
pub struct OutletRegistry {
    entries: Vec<OutletEntry>,
    index: HashMap<String, usize>,
}

impl OutletRegistry {
    pub fn new(entries: Vec<OutletEntry>) -> Result<Self> {
        let mut index = HashMap::with_capacity(entries.len());
        for (i, e) in entries.iter().enumerate() {
            if index.insert(e.account_id.clone(), i).is_some() {
                return Err(Error::InvalidArgument(format!(
                    "duplicate account id `{}` in registry",
                    e.account_id
                )));
            }
        }
        if !entries.iter().any(|e| e.category.is_left_pole()) {
            return Err(Error::InvalidArgument(
                "registry has no account in the left category".into(),
            ));
        }
        if !entries.iter().any(|e| e.category.is_right_pole()) {
            return Err(Error::InvalidArgument(
                "registry has no account in the lean_right or right categories".into(),
            ));
        }
        Ok(OutletRegistry { entries, index })
    }

    /// Convenience constructor for `(account_id, category)` pairs.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, BiasCategory)>) -> Result<Self> {
        Self::new(
            pairs
                .into_iter()
                .map(|(id, category)| OutletEntry {
                    account_id: id.to_string(),
                    display_name: id.to_string(),
                    category,
                    follower_count: 0,
                })
                .collect(),
        )
    }

    pub fn parse<R: BufRead>(reader: R) -> Result<Self> {
        let mut entries = Vec::new();
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim_end_matches(['\r', '\n']);
            if trimmed.trim().is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = trimmed.split('\t').collect();
            if n == 0 && cols.first().is_some_and(|c| c.eq_ignore_ascii_case("account_id")) {
                continue;
            }
            if cols.len() != 4 {
                return Err(Error::Parse {
                    line: n + 1,
                    reason: format!("expected 4 tab-separated columns, found {}", cols.len()),
                });
            }
            let category = cols[2].parse().map_err(|e: Error| Error::Parse {
                line: n + 1,
                reason: e.to_string(),
            })?;
            let follower_count = cols[3].trim().parse().map_err(|_| Error::Parse {
                line: n + 1,
                reason: format!("bad follower count `{}`", cols[3]),
            })?;
            entries.push(OutletEntry {
                account_id: cols[0].trim().to_string(),
                display_name: cols[1].to_string(),
                category,
                follower_count,
            });
        }
        Self::new(entries)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io_at(path, e))?;
        Self::parse(std::io::BufReader::new(file))
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("account_id\tdisplay_name\tcategory\tfollower_count\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                e.account_id, e.display_name, e.category, e.follower_count
            ));
        }
        out
    }

    pub fn entries(&self) -> &[OutletEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn position(&self, account_id: &str) -> Option<usize> {
        self.index.get(account_id).copied()
    }

    pub fn category(&self, account_id: &str) -> Option<BiasCategory> {
        self.position(account_id).map(|i| self.entries[i].category)
    }

    pub fn category_at(&self, pos: usize) -> BiasCategory {
        self.entries[pos].category
    }
}
