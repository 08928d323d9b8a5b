use std::collections::{BTreeMap, HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Side, TweetRecord};
use crate::error::{Error, Result};

pub const WINDOW_CHARS: usize = 60;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Passage {
    pub tweet_id: String,
    pub user_id: String,
    pub side: Side,
    pub target: String,
    /// Target match with up to 60 characters either side.
    pub text_window: String,
    pub full_len: usize,
    /// Char offset and char length of the matched form inside `text_window`.
    pub match_start: usize,
    pub match_len: usize,
}

impl Passage {
    /// Window with the matched target wrapped in `open`…`close`.
    pub fn marked(&self, open: &str, close: &str) -> String {
        let chars: Vec<char> = self.text_window.chars().collect();
        let end = self.match_start + self.match_len;
        let mut s: String = chars[..self.match_start].iter().collect();
        s.push_str(open);
        s.extend(&chars[self.match_start..end]);
        s.push_str(close);
        s.extend(&chars[end..]);
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingRules {
    pub min_chars: usize,
    pub min_words: usize,
    pub min_ttr: f64,
    /// Rejected at or above.
    pub max_top2_letter_ratio: f64,
    /// Rejected at or above.
    pub max_caps_ratio: f64,
    pub allow_plural: bool,
}

impl Default for SamplingRules {
    fn default() -> Self {
        SamplingRules {
            min_chars: 70,
            min_words: 10,
            min_ttr: 0.6,
            max_top2_letter_ratio: 0.4,
            max_caps_ratio: 0.5,
            allow_plural: true,
        }
    }
}

fn word_core(w: &str) -> &str {
    w.trim_matches(|c: char| !c.is_alphanumeric())
}

pub fn type_token_ratio(text: &str) -> f64 {
    let words: Vec<String> = text
        .split_whitespace()
        .map(|w| word_core(w).to_lowercase())
        .filter(|w| !w.is_empty())
        .collect();
    if words.is_empty() {
        return 0.0;
    }
    let types: HashSet<&String> = words.iter().collect();
    types.len() as f64 / words.len() as f64
}

/// Two most frequent letters (case-folded) over the total character length.
pub fn top2_letter_ratio(text: &str) -> f64 {
    let total = text.chars().count();
    if total == 0 {
        return 1.0;
    }
    let mut counts: HashMap<char, usize> = HashMap::new();
    for c in text.chars().filter(|c| c.is_alphabetic()) {
        for l in c.to_lowercase() {
            *counts.entry(l).or_default() += 1;
        }
    }
    let mut v: Vec<usize> = counts.into_values().collect();
    v.sort_unstable_by(|a, b| b.cmp(a));
    v.iter().take(2).sum::<usize>() as f64 / total as f64
}

/// Capitalized words over all-lowercase words; tokens without letters and
/// mixed forms like "iPhone" count toward neither. Infinite when no
/// lowercase word exists.
pub fn caps_ratio(text: &str) -> f64 {
    let (mut caps, mut lower) = (0usize, 0usize);
    for w in text.split_whitespace().map(word_core) {
        let Some(first) = w.chars().next() else { continue };
        if !w.chars().any(char::is_alphabetic) {
            continue;
        }
        if first.is_uppercase() {
            caps += 1;
        } else if w.chars().all(|c| !c.is_uppercase()) && first.is_alphabetic() {
            lower += 1;
        }
    }
    if lower == 0 {
        f64::INFINITY
    } else {
        caps as f64 / lower as f64
    }
}

pub fn passes_rules(text: &str, rules: &SamplingRules) -> bool {
    text.chars().count() >= rules.min_chars
        && text.split_whitespace().count() >= rules.min_words
        && type_token_ratio(text) >= rules.min_ttr
        && top2_letter_ratio(text) < rules.max_top2_letter_ratio
        && caps_ratio(text) < rules.max_caps_ratio
}

/// First case-insensitive occurrence of `target` (optionally plural) that
/// is not glued to letters, digits or hyphens. Returns char offset and
/// char length of the matched form.
pub fn find_target(text: &str, target: &str, allow_plural: bool) -> Option<(usize, usize)> {
    let chars: Vec<char> = text.chars().collect();
    let lower: Vec<char> = chars.iter().map(|c| c.to_lowercase().next().unwrap_or(*c)).collect();
    let t: Vec<char> = target.chars().map(|c| c.to_lowercase().next().unwrap_or(c)).collect();
    if t.is_empty() || t.len() > lower.len() {
        return None;
    }
    let wordy_start = t[0].is_alphanumeric();
    let wordy_end = t[t.len() - 1].is_alphanumeric();
    let suffixes: &[&str] = if allow_plural && wordy_end { &["", "s", "es"] } else { &[""] };
    for start in 0..=lower.len() - t.len() {
        if lower[start..start + t.len()] != t[..] {
            continue;
        }
        if start > 0 {
            let prev = lower[start - 1];
            if prev == '-' || (wordy_start && prev.is_alphanumeric()) {
                continue;
            }
        }
        for suf in suffixes {
            let s: Vec<char> = suf.chars().collect();
            let end = start + t.len() + s.len();
            if end > lower.len() || lower[start + t.len()..end] != s[..] {
                continue;
            }
            let ok_after = match lower.get(end) {
                None => true,
                Some(&next) => next != '-' && !(wordy_end && next.is_alphanumeric()),
            };
            if ok_after {
                return Some((start, end - start));
            }
        }
    }
    None
}

fn window(text: &str, start: usize, len: usize) -> (String, usize) {
    let chars: Vec<char> = text.chars().collect();
    let lo = start.saturating_sub(WINDOW_CHARS);
    let hi = (start + len + WINDOW_CHARS).min(chars.len());
    (chars[lo..hi].iter().collect(), start - lo)
}

/// Draws `n` passages for `target` from one side: each tweet must pass
/// the sampling rules and contain a valid target form; a user contributes
/// at most one tweet (their longest); longer tweets win, equal lengths are
/// ordered by a seeded shuffle.
pub fn sample_passages(
    corpus: &[TweetRecord],
    target: &str,
    side: Side,
    n: usize,
    rules: &SamplingRules,
    seed: u64,
) -> Result<Vec<Passage>> {
    let mut candidates: Vec<(&TweetRecord, usize, usize, usize)> = Vec::new();
    for r in corpus.iter().filter(|r| r.side == side) {
        let text = r.sentiment_text();
        if !passes_rules(text, rules) {
            continue;
        }
        if let Some((s, l)) = find_target(text, target, rules.allow_plural) {
            candidates.push((r, text.chars().count(), s, l));
        }
    }
    // seeded tie-break keys, assigned in a canonical order
    candidates.sort_by(|a, b| a.0.id.cmp(&b.0.id));
    let mut keys: Vec<usize> = (0..candidates.len()).collect();
    keys.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut ranked: Vec<(usize, (&TweetRecord, usize, usize, usize))> = keys.into_iter().zip(candidates).collect();
    ranked.sort_by(|a, b| b.1 .1.cmp(&a.1 .1).then(a.0.cmp(&b.0)));

    let mut per_user: BTreeMap<&str, ()> = BTreeMap::new();
    let mut out = Vec::with_capacity(n);
    for (_, (r, full_len, s, l)) in ranked {
        if out.len() == n {
            break;
        }
        if per_user.insert(r.user.as_str(), ()).is_some() {
            continue;
        }
        let (text_window, match_start) = window(r.sentiment_text(), s, l);
        out.push(Passage {
            tweet_id: r.id.clone(),
            user_id: r.user.clone(),
            side,
            target: target.to_string(),
            text_window,
            full_len,
            match_start,
            match_len: l,
        });
    }
    if out.len() < n {
        return Err(Error::Insufficient(format!(
            "target `{target}` on the {side} side: {} qualifying passages, {n} needed (short by {})",
            out.len(),
            n - out.len()
        )));
    }
    Ok(out)
}
