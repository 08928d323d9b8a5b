//! Port of the VADER rule set (vaderSentiment 3.3.2). Behaviour matches the
//! reference implementation token for token, including its quirks: the
//! "but" reweighting locates sentiments by value, lowercased lookups never
//! hit mixed-case lexicon keys such as ":D", and emoji are replaced by
//! their descriptions one code point at a time.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub const B_INCR: f64 = 0.293;
pub const B_DECR: f64 = -0.293;
pub const C_INCR: f64 = 0.733;
pub const N_SCALAR: f64 = -0.74;
pub const EXCLAMATION_BOOST: f64 = 0.292;
pub const MAX_EXCLAMATIONS: usize = 4;
pub const DEFAULT_ALPHA: f64 = 15.0;

const VADER_LEXICON: &str = include_str!("../../data/vader_lexicon.txt");
const VADER_EMOJI: &str = include_str!("../../data/emoji_utf8_lexicon.txt");
const MINI_LEXICON: &str = include_str!("../../data/mini_lexicon.tsv");

pub const NEGATIONS: &[&str] = &[
    "aint", "arent", "cannot", "cant", "couldnt", "darent", "didnt", "doesnt", "ain't", "aren't", "can't",
    "couldn't", "daren't", "didn't", "doesn't", "dont", "hadnt", "hasnt", "havent", "isnt", "mightnt",
    "mustnt", "neither", "don't", "hadn't", "hasn't", "haven't", "isn't", "mightn't", "mustn't", "neednt",
    "needn't", "never", "none", "nope", "nor", "not", "nothing", "nowhere", "oughtnt", "shant", "shouldnt",
    "uhuh", "wasnt", "werent", "oughtn't", "shan't", "shouldn't", "uh-uh", "wasn't", "weren't", "without",
    "wont", "wouldnt", "won't", "wouldn't", "rarely", "seldom", "despite",
];

const BOOSTERS_UP: &[&str] = &[
    "absolutely", "amazingly", "awfully", "completely", "considerable", "considerably", "decidedly",
    "deeply", "effing", "enormous", "enormously", "entirely", "especially", "exceptional", "exceptionally",
    "extreme", "extremely", "fabulously", "flipping", "flippin", "frackin", "fracking", "fricking",
    "frickin", "frigging", "friggin", "fully", "fuckin", "fucking", "fuggin", "fugging", "greatly",
    "hella", "highly", "hugely", "incredible", "incredibly", "intensely", "major", "majorly", "more",
    "most", "particularly", "purely", "quite", "really", "remarkably", "so", "substantially", "thoroughly",
    "total", "totally", "tremendous", "tremendously", "uber", "unbelievably", "unusually", "utter",
    "utterly", "very",
];

const BOOSTERS_DOWN: &[&str] = &[
    "almost", "barely", "hardly", "just enough", "kind of", "kinda", "kindof", "kind-of", "less", "little",
    "marginal", "marginally", "occasional", "occasionally", "partly", "scarce", "scarcely", "slight",
    "slightly", "somewhat", "sort of", "sorta", "sortof", "sort-of",
];

const SPECIAL_CASES: &[(&str, f64)] = &[
    ("the shit", 3.0),
    ("the bomb", 3.0),
    ("bad ass", 1.5),
    ("badass", 1.5),
    ("bus stop", 0.0),
    ("yeah right", -2.0),
    ("kiss of death", -1.5),
    ("to die for", 3.0),
    ("beating heart", 3.5),
];

#[derive(Debug, Clone)]
pub struct SentimentConfig {
    pub lexicon: HashMap<String, f64>,
    pub boosters: HashMap<String, f64>,
    pub negations: HashSet<String>,
    /// Single code point → description; multi-code-point keys never match.
    pub emoji: HashMap<char, String>,
    pub alpha: f64,
    pub exclamation_boost: f64,
    pub max_exclamations: usize,
    pub caps_boost: f64,
    pub negation_scalar: f64,
}

impl SentimentConfig {
    /// The published VADER lexicon and emoji descriptions.
    pub fn vader() -> Self {
        let lexicon = parse_lexicon(VADER_LEXICON).expect("bundled lexicon parses");
        let emoji = parse_emoji(VADER_EMOJI).expect("bundled emoji lexicon parses");
        Self::with_lexicon(lexicon, emoji)
    }

    /// 200-entry subset of the published lexicon; no emoji descriptions.
    pub fn mini() -> Self {
        let lexicon = parse_lexicon(MINI_LEXICON).expect("bundled mini lexicon parses");
        Self::with_lexicon(lexicon, HashMap::new())
    }

    pub fn with_lexicon(lexicon: HashMap<String, f64>, emoji: HashMap<char, String>) -> Self {
        SentimentConfig {
            lexicon,
            boosters: default_boosters(),
            negations: NEGATIONS.iter().map(|s| s.to_string()).collect(),
            emoji,
            alpha: DEFAULT_ALPHA,
            exclamation_boost: EXCLAMATION_BOOST,
            max_exclamations: MAX_EXCLAMATIONS,
            caps_boost: C_INCR,
            negation_scalar: N_SCALAR,
        }
    }

    pub fn from_files(lexicon: &Path, emoji: Option<&Path>) -> Result<Self> {
        let lex_text = fs::read_to_string(lexicon).map_err(|e| Error::io_at(lexicon, e))?;
        let lex = parse_lexicon(&lex_text)?;
        let emo = match emoji {
            Some(p) => parse_emoji(&fs::read_to_string(p).map_err(|e| Error::io_at(p, e))?)?,
            None => HashMap::new(),
        };
        let cfg = Self::with_lexicon(lex, emo);
        cfg.validate()?;
        Ok(cfg)
    }

    /// Replaces the booster table from `token[<TAB>increment]` lines; a bare
    /// token gets the standard increment.
    pub fn load_boosters(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).map_err(|e| Error::io_at(path, e))?;
        self.boosters = parse_boosters(&text)?;
        Ok(())
    }

    /// Replaces the negation set from a one-token-per-line list.
    pub fn load_negations(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).map_err(|e| Error::io_at(path, e))?;
        self.negations = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_lowercase)
            .collect();
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) {
            return Err(Error::InvalidArgument("alpha must be positive".into()));
        }
        if self.lexicon.is_empty() {
            return Err(Error::Empty("sentiment lexicon"));
        }
        Ok(())
    }

    fn is_negated(&self, word_lower: &str) -> bool {
        self.negations.contains(word_lower) || word_lower.contains("n't")
    }
}

fn default_boosters() -> HashMap<String, f64> {
    BOOSTERS_UP
        .iter()
        .map(|w| (w.to_string(), B_INCR))
        .chain(BOOSTERS_DOWN.iter().map(|w| (w.to_string(), B_DECR)))
        .collect()
}

/// `token<TAB>valence[<TAB>...]`; extra columns are ignored.
pub fn parse_lexicon(text: &str) -> Result<HashMap<String, f64>> {
    let mut out = HashMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim_matches(|c| c == '\r' || c == '\n');
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split('\t');
        let token = parts.next().unwrap_or_default().trim();
        let value = parts.next().ok_or_else(|| Error::Parse {
            line: n + 1,
            reason: "expected token<TAB>valence".into(),
        })?;
        let value: f64 = value.trim().parse().map_err(|_| Error::Parse {
            line: n + 1,
            reason: format!("bad valence `{value}`"),
        })?;
        out.insert(token.to_string(), value);
    }
    Ok(out)
}

fn parse_emoji(text: &str) -> Result<HashMap<char, String>> {
    let mut out = HashMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (key, desc) = line.split_once('\t').ok_or_else(|| Error::Parse {
            line: n + 1,
            reason: "expected emoji<TAB>description".into(),
        })?;
        let mut chars = key.chars();
        if let (Some(c), None) = (chars.next(), chars.next()) {
            out.insert(c, desc.split('\t').next().unwrap_or_default().to_string());
        }
    }
    Ok(out)
}

fn parse_boosters(text: &str) -> Result<HashMap<String, f64>> {
    let mut out = HashMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match line.split_once('\t') {
            Some((tok, v)) => {
                let v: f64 = v.trim().parse().map_err(|_| Error::Parse {
                    line: n + 1,
                    reason: format!("bad booster increment `{v}`"),
                })?;
                out.insert(tok.trim().to_lowercase(), v);
            }
            None => {
                out.insert(line.to_lowercase(), B_INCR);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VaderScores {
    pub compound: f64,
    pub pos: f64,
    pub neg: f64,
    pub neu: f64,
    /// No token carried valence.
    pub all_zero: bool,
}

/// Python `str.isupper`: at least one cased character and none lowercase.
fn py_isupper(s: &str) -> bool {
    let mut cased = false;
    for c in s.chars() {
        if c.is_lowercase() {
            return false;
        }
        if c.is_uppercase() {
            cased = true;
        }
    }
    cased
}

fn is_ascii_punct(c: char) -> bool {
    c.is_ascii_punctuation()
}

fn strip_punc_if_word(token: &str) -> String {
    let stripped = token.trim_matches(is_ascii_punct);
    if stripped.chars().count() <= 2 {
        token.to_string()
    } else {
        stripped.to_string()
    }
}

fn replace_emoji(text: &str, emoji: &HashMap<char, String>) -> String {
    let mut out = String::with_capacity(text.len());
    let mut prev_space = true;
    for c in text.chars() {
        if let Some(desc) = emoji.get(&c) {
            if !prev_space {
                out.push(' ');
            }
            out.push_str(desc);
            prev_space = false;
        } else {
            out.push(c);
            prev_space = c == ' ';
        }
    }
    out
}

pub fn normalize(score: f64, alpha: f64) -> f64 {
    (score / (score * score + alpha).sqrt()).clamp(-1.0, 1.0)
}

struct Words {
    orig: Vec<String>,
    lower: Vec<String>,
    cap_diff: bool,
}

impl Words {
    fn new(text: &str) -> Self {
        let orig: Vec<String> = text.split_whitespace().map(strip_punc_if_word).collect();
        let lower = orig.iter().map(|w| w.to_lowercase()).collect();
        let caps = orig.iter().filter(|w| py_isupper(w)).count();
        let diff = orig.len() - caps;
        let cap_diff = diff > 0 && diff < orig.len();
        Words { orig, lower, cap_diff }
    }
}

pub fn polarity_scores(text: &str, cfg: &SentimentConfig) -> VaderScores {
    let converted = replace_emoji(text, &cfg.emoji);
    let text = converted.trim();
    let words = Words::new(text);
    let n = words.orig.len();
    let mut sentiments: Vec<f64> = Vec::with_capacity(n);
    for i in 0..n {
        let lower = &words.lower[i];
        if cfg.boosters.contains_key(lower.as_str()) {
            sentiments.push(0.0);
            continue;
        }
        if i + 1 < n && lower == "kind" && words.lower[i + 1] == "of" {
            sentiments.push(0.0);
            continue;
        }
        sentiments.push(sentiment_valence(cfg, &words, i));
    }
    but_check(&words.lower, &mut sentiments);
    score_valence(cfg, &sentiments, text)
}

fn scalar_inc_dec(cfg: &SentimentConfig, word: &str, word_lower: &str, valence: f64, cap_diff: bool) -> f64 {
    let mut scalar = 0.0;
    if let Some(&b) = cfg.boosters.get(word_lower) {
        scalar = b;
        if valence < 0.0 {
            scalar *= -1.0;
        }
        if py_isupper(word) && cap_diff {
            if valence > 0.0 {
                scalar += cfg.caps_boost;
            } else {
                scalar -= cfg.caps_boost;
            }
        }
    }
    scalar
}

fn sentiment_valence(cfg: &SentimentConfig, w: &Words, i: usize) -> f64 {
    let lw = &w.lower;
    let lex = &cfg.lexicon;
    let item_lower = lw[i].as_str();
    let Some(&base) = lex.get(item_lower) else {
        return 0.0;
    };
    let mut valence = base;
    if item_lower == "no" && i != lw.len() - 1 && lex.contains_key(lw[i + 1].as_str()) {
        valence = 0.0;
    }
    if (i > 0 && lw[i - 1] == "no")
        || (i > 1 && lw[i - 2] == "no")
        || (i > 2 && lw[i - 3] == "no" && (lw[i - 1] == "or" || lw[i - 1] == "nor"))
    {
        valence = base * cfg.negation_scalar;
    }
    if py_isupper(&w.orig[i]) && w.cap_diff {
        if valence > 0.0 {
            valence += cfg.caps_boost;
        } else {
            valence -= cfg.caps_boost;
        }
    }
    for start_i in 0..3 {
        if i > start_i && !lex.contains_key(lw[i - (start_i + 1)].as_str()) {
            let k = i - (start_i + 1);
            let mut s = scalar_inc_dec(cfg, &w.orig[k], &lw[k], valence, w.cap_diff);
            if start_i == 1 && s != 0.0 {
                s *= 0.95;
            }
            if start_i == 2 && s != 0.0 {
                s *= 0.9;
            }
            valence += s;
            valence = negation_check(cfg, valence, lw, start_i, i);
            if start_i == 2 {
                valence = special_idioms_check(cfg, valence, lw, i);
            }
        }
    }
    least_check(cfg, valence, lw, i)
}

fn negation_check(cfg: &SentimentConfig, valence: f64, lw: &[String], start_i: usize, i: usize) -> f64 {
    let prev = lw[i - (start_i + 1)].as_str();
    match start_i {
        0 => {
            if cfg.is_negated(prev) {
                return valence * cfg.negation_scalar;
            }
        }
        1 => {
            if lw[i - 2] == "never" && (lw[i - 1] == "so" || lw[i - 1] == "this") {
                return valence * 1.25;
            } else if lw[i - 2] == "without" && lw[i - 1] == "doubt" {
                return valence;
            } else if cfg.is_negated(prev) {
                return valence * cfg.negation_scalar;
            }
        }
        _ => {
            // operator precedence of the reference: (never ∧ so|this) ∨ (so|this)
            if (lw[i - 3] == "never" && (lw[i - 2] == "so" || lw[i - 2] == "this"))
                || (lw[i - 1] == "so" || lw[i - 1] == "this")
            {
                return valence * 1.25;
            } else if lw[i - 3] == "without" && (lw[i - 2] == "doubt" || lw[i - 1] == "doubt") {
                return valence;
            } else if cfg.is_negated(prev) {
                return valence * cfg.negation_scalar;
            }
        }
    }
    valence
}

fn special_case(seq: &str) -> Option<f64> {
    SPECIAL_CASES.iter().find(|(k, _)| *k == seq).map(|&(_, v)| v)
}

fn special_idioms_check(cfg: &SentimentConfig, mut valence: f64, lw: &[String], i: usize) -> f64 {
    let onezero = format!("{} {}", lw[i - 1], lw[i]);
    let twoonezero = format!("{} {} {}", lw[i - 2], lw[i - 1], lw[i]);
    let twoone = format!("{} {}", lw[i - 2], lw[i - 1]);
    let threetwoone = format!("{} {} {}", lw[i - 3], lw[i - 2], lw[i - 1]);
    let threetwo = format!("{} {}", lw[i - 3], lw[i - 2]);
    for seq in [&onezero, &twoonezero, &twoone, &threetwoone, &threetwo] {
        if let Some(v) = special_case(seq) {
            valence = v;
            break;
        }
    }
    if lw.len() - 1 > i {
        if let Some(v) = special_case(&format!("{} {}", lw[i], lw[i + 1])) {
            valence = v;
        }
    }
    if lw.len() - 1 > i + 1 {
        if let Some(v) = special_case(&format!("{} {} {}", lw[i], lw[i + 1], lw[i + 2])) {
            valence = v;
        }
    }
    for ngram in [&threetwoone, &threetwo, &twoone] {
        if let Some(&b) = cfg.boosters.get(ngram.as_str()) {
            valence += b;
        }
    }
    valence
}

fn least_check(cfg: &SentimentConfig, valence: f64, lw: &[String], i: usize) -> f64 {
    let lex = &cfg.lexicon;
    if i > 1 && !lex.contains_key(lw[i - 1].as_str()) && lw[i - 1] == "least" {
        if lw[i - 2] != "at" && lw[i - 2] != "very" {
            return valence * cfg.negation_scalar;
        }
    } else if i > 0 && !lex.contains_key(lw[i - 1].as_str()) && lw[i - 1] == "least" {
        return valence * cfg.negation_scalar;
    }
    valence
}

/// Each pass looks up the current value's first occurrence, so equal
/// sentiments on both sides of "but" interact exactly as in the reference.
fn but_check(lower: &[String], sentiments: &mut [f64]) {
    let Some(bi) = lower.iter().position(|w| w == "but") else {
        return;
    };
    for k in 0..sentiments.len() {
        let s = sentiments[k];
        let si = sentiments.iter().position(|&x| x == s).expect("value present");
        if si < bi {
            sentiments[si] = s * 0.5;
        } else if si > bi {
            sentiments[si] = s * 1.5;
        }
    }
}

fn punctuation_emphasis(cfg: &SentimentConfig, text: &str) -> f64 {
    let ep = text.matches('!').count().min(cfg.max_exclamations);
    let qm = text.matches('?').count();
    let qm_amp = if qm > 1 {
        if qm <= 3 {
            qm as f64 * 0.18
        } else {
            0.96
        }
    } else {
        0.0
    };
    ep as f64 * cfg.exclamation_boost + qm_amp
}

fn score_valence(cfg: &SentimentConfig, sentiments: &[f64], text: &str) -> VaderScores {
    if sentiments.is_empty() {
        return VaderScores {
            compound: 0.0,
            pos: 0.0,
            neg: 0.0,
            neu: 0.0,
            all_zero: true,
        };
    }
    let mut sum: f64 = sentiments.iter().sum();
    let amp = punctuation_emphasis(cfg, text);
    if sum > 0.0 {
        sum += amp;
    } else if sum < 0.0 {
        sum -= amp;
    }
    let compound = normalize(sum, cfg.alpha);

    let (mut pos_sum, mut neg_sum, mut neu) = (0.0, 0.0, 0usize);
    for &s in sentiments {
        if s > 0.0 {
            pos_sum += s + 1.0;
        }
        if s < 0.0 {
            neg_sum += s - 1.0;
        }
        if s == 0.0 {
            neu += 1;
        }
    }
    if pos_sum > neg_sum.abs() {
        pos_sum += amp;
    } else if pos_sum < neg_sum.abs() {
        neg_sum -= amp;
    }
    let total = pos_sum + neg_sum.abs() + neu as f64;
    VaderScores {
        compound,
        pos: (pos_sum / total).abs(),
        neg: (neg_sum / total).abs(),
        neu: (neu as f64 / total).abs(),
        all_zero: sentiments.iter().all(|&s| s == 0.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isupper_matches_python() {
        assert!(py_isupper("GREAT"));
        assert!(py_isupper("I"));
        assert!(py_isupper("A1!"));
        assert!(!py_isupper(":)"));
        assert!(!py_isupper("2021"));
        assert!(!py_isupper("Great"));
    }

    #[test]
    fn punctuation_stripping_keeps_short_emoticons() {
        assert_eq!(strip_punc_if_word(":)"), ":)");
        assert_eq!(strip_punc_if_word("great!"), "great");
        assert_eq!(strip_punc_if_word("'hi'"), "'hi'");
        assert_eq!(strip_punc_if_word("...wow..."), "wow");
    }

    #[test]
    fn emoji_become_descriptions() {
        let mut m = HashMap::new();
        m.insert('😀', "grinning face".to_string());
        assert_eq!(replace_emoji("ok😀", &m), "ok grinning face");
        assert_eq!(replace_emoji("ok 😀😀", &m), "ok grinning face grinning face");
    }

    #[test]
    fn but_check_value_lookup_quirk() {
        let lower: Vec<String> = ["a", "b", "but"].iter().map(|s| s.to_string()).collect();
        let mut s = vec![2.0, 1.0, 0.0];
        but_check(&lower, &mut s);
        // after halving index 0 to 1.0, the lookup for 1.0 lands on index 0 again
        assert_eq!(s, vec![0.5, 1.0, 0.0]);

        let lower: Vec<String> = ["good", "but", "good"].iter().map(|s| s.to_string()).collect();
        let mut s = vec![1.9, 0.0, 1.9];
        but_check(&lower, &mut s);
        assert_eq!(s, vec![0.95, 0.0, 1.9 * 1.5]);
    }

    #[test]
    fn boosters_file_format() {
        let b = parse_boosters("very\nslightly\t-0.293\n# note\n").unwrap();
        assert_eq!(b["very"], B_INCR);
        assert_eq!(b["slightly"], -0.293);
        assert_eq!(b.len(), 2);
    }
}
