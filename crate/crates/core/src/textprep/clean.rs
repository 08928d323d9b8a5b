use std::collections::BTreeSet;
use std::path::Path;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::emoji;
use crate::delineate::RawTweet;
use crate::error::{Error, Result};

pub const DEFAULT_EMOTICONS: &[&str] = &[
    ":)", ":(", ":-)", ":-(", ";)", ";-)", ":d", ":-d", ":/", ":-/", "<3", "</3", ":p", ":-p", ":'(",
    ":o", ":|", "=)", ":]", ":[",
];

pub const DEFAULT_BOT_KEYWORDS: &[&str] = &["threadreaderapp", "remindmeofthis"];

/// Emoticons that survive punctuation removal. Matching is case-insensitive
/// and entries are stored lowercase.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmoticonDict(BTreeSet<String>);

impl EmoticonDict {
    pub fn new<S: AsRef<str>>(entries: impl IntoIterator<Item = S>) -> Self {
        EmoticonDict(
            entries
                .into_iter()
                .map(|s| s.as_ref().trim().to_lowercase())
                .filter(|s| !s.is_empty())
                .collect(),
        )
    }

    /// One entry per line; blank lines and `#` comments skipped.
    pub fn parse(text: &str) -> Self {
        Self::new(text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with("# ")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io_at(path, e))?;
        Ok(Self::parse(&text))
    }

    pub fn extend<S: AsRef<str>>(&mut self, entries: impl IntoIterator<Item = S>) {
        self.0.extend(entries.into_iter().map(|s| s.as_ref().to_lowercase()));
    }

    pub fn contains(&self, token: &str) -> bool {
        self.0.contains(&token.to_lowercase())
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }
}

impl Default for EmoticonDict {
    fn default() -> Self {
        Self::new(DEFAULT_EMOTICONS.iter().copied())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CleanRuleSet {
    pub remove_urls: bool,
    pub remove_mentions: bool,
    pub remove_times: bool,
    pub strip_hashmarks: bool,
    pub strip_punct_keep_emoticons: bool,
    pub lowercase: bool,
    pub collapse_whitespace: bool,
    pub normalize_reduplication: bool,
    pub strip_emoji_modifiers: bool,
    pub drop_bot_keywords: bool,
    pub bot_keywords: Vec<String>,
    pub emoticons: EmoticonDict,
}

impl Default for CleanRuleSet {
    fn default() -> Self {
        CleanRuleSet {
            remove_urls: true,
            remove_mentions: true,
            remove_times: true,
            strip_hashmarks: true,
            strip_punct_keep_emoticons: true,
            lowercase: true,
            collapse_whitespace: true,
            normalize_reduplication: true,
            strip_emoji_modifiers: true,
            drop_bot_keywords: true,
            bot_keywords: DEFAULT_BOT_KEYWORDS.iter().map(|s| s.to_string()).collect(),
            emoticons: EmoticonDict::default(),
        }
    }
}

impl CleanRuleSet {
    pub fn validate(&self) -> Result<()> {
        if self.drop_bot_keywords && self.bot_keywords.iter().all(|k| k.trim().is_empty()) {
            return Err(Error::InvalidArgument(
                "drop_bot_keywords is set but the keyword list is empty".into(),
            ));
        }
        Ok(())
    }
}

static URL: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)(?:https?://|www\.)\S*").unwrap());
static MENTION: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"@\w+").unwrap());
// A leading "at" belongs to the time expression ("at 3 PM").
static CLOCK_TIME: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)(?:\bat\s+)?\b\d{1,2}(?::\d{2})?\s?[ap]\.?m\b\.?").unwrap()
});

fn is_punct(c: char) -> bool {
    c.is_ascii_punctuation() || matches!(c,
        '\u{2010}'..='\u{2027}' | '\u{2030}'..='\u{205E}' | '\u{00A1}' | '\u{00A7}' | '\u{00AB}'
        | '\u{00B6}' | '\u{00B7}' | '\u{00BB}' | '\u{00BF}' | '\u{3001}'..='\u{3003}'
        | '\u{300C}'..='\u{300F}' | '\u{FF01}'..='\u{FF0F}')
}

fn is_apostrophe(c: char) -> bool {
    matches!(c, '\'' | '\u{2019}' | '\u{2018}' | '`')
}

fn strip_punct(chunk: &str, out: &mut String) {
    for c in chunk.chars() {
        if is_apostrophe(c) {
            continue;
        }
        if is_punct(c) {
            out.push(' ');
        } else {
            out.push(c);
        }
    }
}

/// Collapses any letter repeated three or more times to two, and any
/// two- or three-letter unit repeated three or more times to two copies.
pub fn normalize_reduplication(word: &str) -> String {
    let mut out = String::with_capacity(word.len());
    let mut run: Vec<char> = Vec::new();
    for c in word.chars() {
        if c.is_alphabetic() {
            run.push(c);
        } else {
            flush_run(&mut run, &mut out);
            out.push(c);
        }
    }
    flush_run(&mut run, &mut out);
    out
}

fn flush_run(run: &mut Vec<char>, out: &mut String) {
    if run.is_empty() {
        return;
    }
    let mut chars = std::mem::take(run);
    loop {
        let before = chars.len();
        chars = collapse_units(&chars, 1);
        chars = collapse_units(&chars, 2);
        chars = collapse_units(&chars, 3);
        if chars.len() == before {
            break;
        }
    }
    out.extend(chars);
}

fn collapse_units(chars: &[char], unit: usize) -> Vec<char> {
    let mut out = Vec::with_capacity(chars.len());
    let mut i = 0;
    while i < chars.len() {
        if i + unit <= chars.len() {
            let pat = &chars[i..i + unit];
            let mut reps = 1;
            while i + (reps + 1) * unit <= chars.len() && &chars[i + reps * unit..i + (reps + 1) * unit] == pat {
                reps += 1;
            }
            if reps >= 3 {
                out.extend_from_slice(pat);
                out.extend_from_slice(pat);
                i += reps * unit;
                continue;
            }
        }
        out.push(chars[i]);
        i += 1;
    }
    out
}

fn clean_once(raw: &str, rules: &CleanRuleSet) -> String {
    let mut text = raw.to_string();
    if rules.remove_urls {
        text = URL.replace_all(&text, " ").into_owned();
    }
    if rules.remove_mentions {
        text = MENTION.replace_all(&text, " ").into_owned();
    }
    if rules.remove_times {
        text = CLOCK_TIME.replace_all(&text, " ").into_owned();
    }
    if rules.strip_emoji_modifiers {
        text = emoji::strip_modifiers(&text);
    }

    let mut out = String::with_capacity(text.len());
    for chunk in text.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        if rules.strip_punct_keep_emoticons {
            if rules.emoticons.contains(chunk) {
                out.push_str(chunk);
            } else {
                strip_punct(chunk, &mut out);
            }
        } else if rules.strip_hashmarks {
            out.push_str(chunk.trim_start_matches('#'));
        } else {
            out.push_str(chunk);
        }
    }

    if rules.lowercase {
        out = out.to_lowercase();
    }
    if rules.normalize_reduplication {
        out = out
            .split(' ')
            .map(|w| if rules.emoticons.contains(w) { w.to_string() } else { normalize_reduplication(w) })
            .collect::<Vec<_>>()
            .join(" ");
    }
    if rules.collapse_whitespace {
        out.split_whitespace().collect::<Vec<_>>().join(" ")
    } else {
        out.trim().to_string()
    }
}

/// Applies the cleaning rules until the text no longer changes, which makes
/// the result idempotent even where one rule exposes input for another
/// (e.g. punctuation removal turning `3-pm` into a clock time).
pub fn clean_text(raw: &str, rules: &CleanRuleSet) -> String {
    let mut current = clean_once(raw, rules);
    for _ in 0..8 {
        let next = clean_once(&current, rules);
        if next == current {
            break;
        }
        current = next;
    }
    current
}

pub fn is_excluded_tweet(tweet: &RawTweet, rules: &CleanRuleSet) -> bool {
    if !tweet.lang_tag.eq_ignore_ascii_case("en") {
        return true;
    }
    if rules.drop_bot_keywords {
        let lower = tweet.text.to_lowercase();
        return rules
            .bot_keywords
            .iter()
            .filter(|k| !k.is_empty())
            .any(|k| lower.contains(&k.to_lowercase()));
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clean(s: &str) -> String {
        clean_text(s, &CleanRuleSet::default())
    }

    #[test]
    fn worked_examples() {
        assert_eq!(clean("Check THIS out https://t.co/abc @user at 3:00 PM #MAGA!"), "check this out maga");
        assert_eq!(clean("hahahahaha hmmm :)"), "haha hmm :)");
        assert_eq!(clean("👍🏽 great"), "👍 great");
        assert_eq!(clean("so   COOL!!!"), "so cool");
    }

    #[test]
    fn reduplication_rules() {
        assert_eq!(normalize_reduplication("hahaha"), "haha");
        assert_eq!(normalize_reduplication("haha"), "haha");
        assert_eq!(normalize_reduplication("hmmmmm"), "hmm");
        assert_eq!(normalize_reduplication("lollollol"), "lollol");
        assert_eq!(normalize_reduplication("good"), "good");
        assert_eq!(normalize_reduplication("banana"), "banana");
        assert_eq!(normalize_reduplication("2000"), "2000");
        assert_eq!(normalize_reduplication("nooooo"), "noo");
    }

    #[test]
    fn emoticons_survive_and_lowercase() {
        assert_eq!(clean("yes :D"), "yes :d");
        assert_eq!(clean("love <3 u"), "love <3 u");
        assert_eq!(clean("meh :/ ok"), "meh :/ ok");
    }

    #[test]
    fn punctuation_handling() {
        assert_eq!(clean("don't stop"), "dont stop");
        assert_eq!(clean("and/or, maybe."), "and or maybe");
        assert_eq!(clean("#Vaccine works"), "vaccine works");
    }

    #[test]
    fn rules_can_be_disabled() {
        let rules = CleanRuleSet { lowercase: false, ..CleanRuleSet::default() };
        assert_eq!(clean_text("Keep Case", &rules), "Keep Case");
        let rules = CleanRuleSet {
            strip_punct_keep_emoticons: false,
            ..CleanRuleSet::default()
        };
        assert_eq!(clean_text("#tag, here!", &rules), "tag, here!");
    }

    #[test]
    fn empty_bot_list_is_invalid() {
        let rules = CleanRuleSet { bot_keywords: vec![], ..CleanRuleSet::default() };
        assert!(rules.validate().is_err());
        assert!(CleanRuleSet::default().validate().is_ok());
    }

    fn raw(text: &str, lang: &str) -> RawTweet {
        RawTweet {
            tweet_id: "1".into(),
            user_id: "u".into(),
            timestamp: "2021-03-01T00:00:00Z".parse().unwrap(),
            text: text.into(),
            likes: 0,
            retweets: 0,
            lang_tag: lang.into(),
            has_media: false,
        }
    }

    #[test]
    fn exclusion_rules() {
        let rules = CleanRuleSet::default();
        assert!(is_excluded_tweet(&raw("hola amigos", "es"), &rules));
        assert!(is_excluded_tweet(&raw("@ThreadReaderApp unroll", "en"), &rules));
        assert!(!is_excluded_tweet(&raw("just a normal day", "en"), &rules));
    }
}
