//! Pipeline configuration: a TOML file layered over defaults, with
//! `--set section.key=value` overrides applied last.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use lexdiv::annotate::{LlmConfig, SamplingRules};
use lexdiv::delineate::{AdmissionRules, DateWindow, DEFAULT_TWEET_CAP};
use lexdiv::embed::EmbeddingParams;
use lexdiv::lexstats::EligibilityProfile;
use lexdiv::sentiment::Granularity;
use lexdiv::textprep::CleanRuleSet;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub registry: PathBuf,
    pub followers: Vec<PathBuf>,
    /// UserProfile JSONL.
    pub profiles: PathBuf,
    /// Raw post JSONL: `{id, user, ts, text, likes, rts, lang}`.
    pub tweets: PathBuf,
    pub work_dir: PathBuf,
    pub lexicon: Option<PathBuf>,
    pub emoji_lexicon: Option<PathBuf>,
    pub boosters: Option<PathBuf>,
    pub negations: Option<PathBuf>,
    pub lemma_exceptions: Option<PathBuf>,
    pub emoticons: Option<PathBuf>,
    /// Static files served next to the annotation API.
    pub web_root: Option<PathBuf>,
}

impl Default for Paths {
    fn default() -> Self {
        Paths {
            registry: "data/registry.tsv".into(),
            followers: vec!["data/followers.tsv".into()],
            profiles: "data/profiles.jsonl".into(),
            tweets: "data/tweets.jsonl".into(),
            work_dir: "work".into(),
            lexicon: None,
            emoji_lexicon: None,
            boosters: None,
            negations: None,
            lemma_exceptions: None,
            emoticons: None,
            web_root: None,
        }
    }
}

impl Paths {
    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.registry);
        self.followers.iter_mut().for_each(fix);
        fix(&mut self.profiles);
        fix(&mut self.tweets);
        fix(&mut self.work_dir);
        for p in [
            &mut self.lexicon,
            &mut self.emoji_lexicon,
            &mut self.boosters,
            &mut self.negations,
            &mut self.lemma_exceptions,
            &mut self.emoticons,
            &mut self.web_root,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Window {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl Default for Window {
    fn default() -> Self {
        Window {
            start: NaiveDate::from_ymd_opt(2021, 2, 1).unwrap(),
            end: NaiveDate::from_ymd_opt(2021, 9, 30).unwrap(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DelineateSettings {
    pub tweet_cap: usize,
    /// Distinct users held in memory before the tally spills to disk.
    pub tally_memory_users: usize,
}

impl Default for DelineateSettings {
    fn default() -> Self {
        DelineateSettings { tweet_cap: DEFAULT_TWEET_CAP, tally_memory_users: 5_000_000 }
    }
}

/// Thresholds of the frequency-report eligibility profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FreqSettings {
    pub min_either: u64,
    pub min_total: u64,
    pub min_users: u64,
    pub min_user_token_ratio: f64,
}

impl Default for FreqSettings {
    fn default() -> Self {
        let p = EligibilityProfile::freq();
        FreqSettings {
            min_either: p.min_either,
            min_total: p.min_total,
            min_users: p.min_users,
            min_user_token_ratio: p.min_user_token_ratio,
        }
    }
}

impl FreqSettings {
    pub fn profile(&self) -> EligibilityProfile {
        EligibilityProfile {
            min_either: self.min_either,
            min_total: self.min_total,
            min_users: self.min_users,
            min_user_token_ratio: self.min_user_token_ratio,
            ..EligibilityProfile::freq()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlignSettings {
    /// Token count required in both subcorpora.
    pub min_both: u64,
    pub center: bool,
}

impl Default for AlignSettings {
    fn default() -> Self {
        AlignSettings { min_both: EligibilityProfile::embed().min_both, center: true }
    }
}

impl AlignSettings {
    pub fn profile(&self) -> EligibilityProfile {
        EligibilityProfile { min_both: self.min_both, ..EligibilityProfile::embed() }
    }
}

/// Grid for `embed --tune`: the cross product of the listed values, each
/// applied on top of `[embed]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TuneGrid {
    pub dims: Vec<usize>,
    pub windows: Vec<usize>,
    pub min_counts: Vec<u64>,
}

impl Default for TuneGrid {
    fn default() -> Self {
        TuneGrid { dims: vec![25, 50, 100], windows: vec![3, 5], min_counts: vec![5] }
    }
}

impl TuneGrid {
    pub fn points(&self, base: &EmbeddingParams) -> Vec<EmbeddingParams> {
        let mut out = Vec::new();
        for &dim in &self.dims {
            for &window in &self.windows {
                for &min_count in &self.min_counts {
                    out.push(EmbeddingParams { dim, window, min_count, ..base.clone() });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SentimentSettings {
    pub granularity: Granularity,
    pub permutations: usize,
    /// Adds side and side × log10(followers) terms to the popularity fit.
    pub interaction: bool,
    /// Use the bundled 200-entry lexicon instead of the full one.
    pub mini_lexicon: bool,
}

impl Default for SentimentSettings {
    fn default() -> Self {
        SentimentSettings {
            granularity: Granularity::Weekly,
            permutations: lexdiv::sentiment::DEFAULT_PERMUTATIONS,
            interaction: true,
            mini_lexicon: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopicSettings {
    /// Suggested from the k-NN distance elbow when unset.
    pub eps: Option<f64>,
    pub min_pts: usize,
    pub eps_k: usize,
    pub keywords: usize,
    pub bootstraps: usize,
    pub lambda: Option<f64>,
}

impl Default for TopicSettings {
    fn default() -> Self {
        TopicSettings {
            eps: None,
            min_pts: 5,
            eps_k: 4,
            keywords: 10,
            bootstraps: lexdiv::topics::DEFAULT_BOOTSTRAPS,
            lambda: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnotateSettings {
    pub targets: Vec<String>,
    pub session: String,
    pub host: String,
    pub port: u16,
    pub sampling: SamplingRules,
}

impl Default for AnnotateSettings {
    fn default() -> Self {
        AnnotateSettings {
            targets: Vec::new(),
            session: "main".into(),
            host: "127.0.0.1".into(),
            port: 8080,
            sampling: SamplingRules::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Seeds {
    pub sentiment: u64,
    pub classify: u64,
    pub annotate: u64,
}

impl Default for Seeds {
    fn default() -> Self {
        Seeds { sentiment: 11, classify: 13, annotate: 17 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportSettings {
    pub svg: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub paths: Paths,
    pub window: Window,
    pub admission: AdmissionRules,
    pub delineate: DelineateSettings,
    pub clean: CleanRuleSet,
    pub freq: FreqSettings,
    pub embed: EmbeddingParams,
    pub align: AlignSettings,
    pub tune: TuneGrid,
    pub sentiment: SentimentSettings,
    pub topics: TopicSettings,
    pub annotate: AnnotateSettings,
    pub llm: LlmConfig,
    pub seeds: Seeds,
    pub report: ReportSettings,
}

/// Splits `a.b.c=value`; the value is read as a TOML literal when it parses
/// as one, else as a bare string.
fn parse_override(s: &str) -> CliResult<(Vec<String>, toml::Value)> {
    let (key, raw) = s
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override `{s}` is not key=value")))?;
    let key: Vec<String> = key.trim().split('.').map(|k| k.trim().to_string()).collect();
    if key.iter().any(String::is_empty) {
        return Err(CliError::Config(format!("override `{s}` has an empty key segment")));
    }
    let raw = raw.trim();
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    Ok((key, value))
}

fn apply_override(table: &mut toml::Table, key: &[String], value: toml::Value) -> CliResult<()> {
    let (last, parents) = key.split_last().expect("non-empty key");
    let mut cur = table;
    for k in parents {
        let entry = cur.entry(k.clone()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("`{}` is not a table", key.join("."))))?;
    }
    cur.insert(last.clone(), value);
    Ok(())
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str) -> CliResult<PipelineConfig> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn to_toml_string(&self) -> CliResult<String> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    /// defaults < file < overrides. Relative paths are taken relative to
    /// the config file's directory, or `cwd` without a file.
    pub fn load(file: Option<&Path>, overrides: &[String], cwd: &Path) -> CliResult<PipelineConfig> {
        let (mut table, base) = match file {
            Some(f) => {
                let text = std::fs::read_to_string(f)
                    .map_err(|e| CliError::Config(format!("cannot read config file {}: {e}", f.display())))?;
                let t: toml::Table =
                    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", f.display())))?;
                let dir = f.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
                (t, if dir.is_relative() { cwd.join(dir) } else { dir.to_path_buf() })
            }
            None => (toml::Table::new(), cwd.to_path_buf()),
        };
        for o in overrides {
            let (k, v) = parse_override(o)?;
            apply_override(&mut table, &k, v)?;
        }
        reject_credentials(&table)?;
        let mut cfg: PipelineConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
        cfg.paths.resolve(&base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Config(m));
        DateWindow::new(self.window.start, self.window.end).map_err(|e| CliError::Config(e.to_string()))?;
        let a = &self.admission;
        if !(a.min_likes_ratio >= 0.0 && a.min_likes_ratio.is_finite()) {
            return bad("admission.min_likes_ratio must be a finite non-negative number".into());
        }
        if self.delineate.tweet_cap == 0 || self.delineate.tally_memory_users == 0 {
            return bad("delineate.tweet_cap and delineate.tally_memory_users must be positive".into());
        }
        self.clean.validate().map_err(|e| CliError::Config(e.to_string()))?;
        if !(0.0..=1.0).contains(&self.freq.min_user_token_ratio) {
            return bad("freq.min_user_token_ratio must lie in [0, 1]".into());
        }
        self.embed.validate().map_err(|e| CliError::Config(format!("embed: {e}")))?;
        for p in self.tune.points(&self.embed) {
            p.validate().map_err(|e| CliError::Config(format!("tune: {e}")))?;
        }
        if self.sentiment.permutations == 0 {
            return bad("sentiment.permutations must be positive".into());
        }
        let t = &self.topics;
        if t.eps.is_some_and(|e| !(e > 0.0 && e.is_finite())) {
            return bad("topics.eps must be positive".into());
        }
        if t.min_pts == 0 || t.eps_k == 0 || t.keywords == 0 || t.bootstraps == 0 {
            return bad("topics.min_pts, eps_k, keywords and bootstraps must be positive".into());
        }
        if t.lambda.is_some_and(|l| !(l >= 0.0 && l.is_finite())) {
            return bad("topics.lambda must be non-negative".into());
        }
        let s = &self.annotate.sampling;
        if !(0.0..=1.0).contains(&s.min_ttr) || !(s.max_top2_letter_ratio > 0.0) || !(s.max_caps_ratio > 0.0) {
            return bad("annotate.sampling ratios out of range".into());
        }
        if self.annotate.targets.iter().any(|t| t.trim().is_empty()) {
            return bad("annotate.targets contains an empty target".into());
        }
        lexdiv::annotate::session_dir(Path::new("."), &self.annotate.session)
            .map_err(|e| CliError::Config(e.to_string()))?;
        self.llm.validate().map_err(|e| CliError::Config(format!("llm: {e}")))?;
        if self.llm.api_key_env.trim().is_empty() {
            return bad("llm.api_key_env must name an environment variable".into());
        }
        Ok(())
    }

    /// SHA-256 of the emitted configuration without `[paths]`, so the same
    /// settings hash identically wherever the data lives.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.paths = Paths::default();
        let text = c.to_toml_string().expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    pub fn date_window(&self) -> DateWindow {
        DateWindow::new(self.window.start, self.window.end).expect("validated")
    }
}

/// Keys that would hold a secret; the only supported source is the
/// environment variable named by `llm.api_key_env`.
const SECRET_KEYS: &[&str] = &["api_key", "apikey", "key", "token", "secret", "password", "authorization"];

fn reject_credentials(table: &toml::Table) -> CliResult<()> {
    let Some(llm) = table.get("llm").and_then(toml::Value::as_table) else { return Ok(()) };
    for k in llm.keys() {
        if SECRET_KEYS.contains(&k.to_ascii_lowercase().as_str()) {
            let env = llm.get("api_key_env").and_then(toml::Value::as_str).unwrap_or(lexdiv::annotate::DEFAULT_API_KEY_ENV);
            return Err(CliError::Config(format!(
                "llm.{k}: credentials are not read from configuration; export {env} instead"
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn override_values() {
        let (k, v) = parse_override("embed.dim=100").unwrap();
        assert_eq!(k, ["embed", "dim"]);
        assert_eq!(v, toml::Value::Integer(100));
        let (_, v) = parse_override("annotate.session=pilot").unwrap();
        assert_eq!(v, toml::Value::String("pilot".into()));
        let (_, v) = parse_override("annotate.targets=[\"cat\", \"bat\"]").unwrap();
        assert!(v.is_array());
        assert!(parse_override("novalue").is_err());
        assert!(parse_override("a..b=1").is_err());
    }
}
