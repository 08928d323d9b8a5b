use std::fmt::Write as _;
use std::path::Path;

use lexdiv::sentiment::RegressionResult;
use serde_json::Value;

use super::{files, fmt_opt};
use crate::artifacts::{Manifest, Stage};
use crate::config::PipelineConfig;
use crate::error::{CliError, CliResult};
use crate::svg::{scatter, Series};

pub const REPORT_HEADER: &str = "section\tkey\tvalue";
pub const TOP_DIVERGENT: usize = 20;
pub const TOP_SKEWED: usize = 10;

/// Header-keyed rows of a TSV artifact.
struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn read(path: &Path) -> CliResult<Table> {
        let text = std::fs::read_to_string(path)?;
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| CliError::Runtime(format!("{} is empty", path.display())))?
            .split('\t')
            .map(str::to_string)
            .collect();
        let rows = lines.filter(|l| !l.is_empty()).map(|l| l.split('\t').map(str::to_string).collect()).collect();
        Ok(Table { header, rows })
    }

    fn col(&self, name: &str) -> CliResult<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Runtime(format!("column `{name}` missing")))
    }

    fn num(row: &[String], i: usize) -> f64 {
        row.get(i).and_then(|v| v.parse().ok()).unwrap_or(f64::NAN)
    }
}

fn read_json<T: serde::de::DeserializeOwned>(stage: &mut Stage, role: &str, path: &Path) -> CliResult<T> {
    Ok(serde_json::from_slice(&std::fs::read(stage.input(role, path)?)?)?)
}

fn regression_rows(out: &mut String, section: &str, r: &RegressionResult) {
    for c in &r.coefficients {
        writeln!(out, "{section}\t{}\t{:.6}", c.name, c.estimate).unwrap();
        if let Some(p) = c.p_value {
            writeln!(out, "{section}\t{}_p\t{p:.6}", c.name).unwrap();
        }
    }
    writeln!(out, "{section}\tr_squared\t{:.6}", r.r_squared).unwrap();
    writeln!(out, "{section}\tn\t{}", r.n).unwrap();
}

/// Headline numbers from every analysis stage in one TSV, plus optional
/// scatter plots.
pub fn report(cfg: &PipelineConfig) -> CliResult<Manifest> {
    let mut stage = Stage::begin(cfg, "report", None);
    let stats: Value = read_json(&mut stage, "corpus statistics", &cfg.work(files::STATS))?;
    let effect: RegressionResult = read_json(&mut stage, "side effect", &cfg.work(files::SENTIMENT_EFFECT))?;
    let popularity: RegressionResult =
        read_json(&mut stage, "popularity regression", &cfg.work(files::SENTIMENT_POPULARITY))?;
    let freq = Table::read(&stage.input("frequency report", &cfg.work(files::FREQ))?)?;
    let div = Table::read(&stage.input("divergence ranking", &cfg.work(files::DIVERGENCE))?)?;
    let clf = Table::read(&stage.input("classifier evaluation", &cfg.work(files::CLASSIFIER))?)?;

    let mut out = String::from(REPORT_HEADER);
    out.push('\n');
    for side in ["left", "right", "all"] {
        for level in ["raw", "lemmatized"] {
            let s = &stats[side][level];
            for key in ["tweet_count", "user_count", "token_count", "type_count"] {
                writeln!(out, "corpus\t{side}.{level}.{key}\t{}", s[key]).unwrap();
            }
            writeln!(out, "corpus\t{side}.{level}.ttr\t{}", fmt_opt(s["ttr"].as_f64())).unwrap();
        }
    }

    writeln!(out, "frequency\teligible_lexemes\t{}", freq.rows.len()).unwrap();
    let (lex, fold) = (freq.col("lexeme")?, freq.col("log2_fold")?);
    let mut skewed: Vec<(&str, f64)> = freq
        .rows
        .iter()
        .map(|r| (r[lex].as_str(), Table::num(r, fold)))
        .filter(|(_, f)| f.is_finite())
        .collect();
    skewed.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(b.0)));
    for (w, f) in skewed.iter().take(TOP_SKEWED) {
        writeln!(out, "frequency\tleft_skewed.{w}\t{f:.6}").unwrap();
    }
    for (w, f) in skewed.iter().rev().take(TOP_SKEWED) {
        writeln!(out, "frequency\tright_skewed.{w}\t{f:.6}").unwrap();
    }

    regression_rows(&mut out, "sentiment_side", &effect);
    regression_rows(&mut out, "sentiment_popularity", &popularity);

    let (dl, dd) = (div.col("lexeme")?, div.col("distance")?);
    writeln!(out, "divergence\tshared_lexemes\t{}", div.rows.len()).unwrap();
    for (rank, r) in div.rows.iter().take(TOP_DIVERGENT).enumerate() {
        writeln!(out, "divergence\t{}.{}\t{:.6}", rank + 1, r[dl], Table::num(r, dd)).unwrap();
    }

    if let Some(row) = clf.rows.first() {
        for (i, h) in clf.header.iter().enumerate() {
            writeln!(out, "classifier\t{h}\t{}", row.get(i).map_or("NA", String::as_str)).unwrap();
        }
    }
    stage.write("report", &cfg.work(files::REPORT), out.as_bytes())?;

    if cfg.report.svg {
        let map = Table::read(&stage.input("topic map", &cfg.work(files::TOPIC_MAP))?)?;
        let (mx, my, ms) = (map.col("x")?, map.col("y")?, map.col("side")?);
        let map_pts = |side: &str| -> Vec<(f64, f64)> {
            map.rows
                .iter()
                .filter(|r| r[ms] == side)
                .map(|r| (Table::num(r, mx), Table::num(r, my)))
                .collect()
        };
        let svg = scatter(
            "Document map",
            "component 1",
            "component 2",
            &[
                Series { label: "left", color: "#1f77b4", points: map_pts("left") },
                Series { label: "right", color: "#d62728", points: map_pts("right") },
            ],
        );
        stage.write("map plot", &cfg.work(files::REPORT_MAP_SVG), svg.as_bytes())?;

        let du = div.col("user_share")?;
        let pts: Vec<(f64, f64)> = div.rows.iter().map(|r| (Table::num(r, du), Table::num(r, dd))).collect();
        let svg = scatter(
            "Cross-side divergence",
            "user share",
            "cosine distance",
            &[Series { label: "lexeme", color: "#444444", points: pts }],
        );
        stage.write("divergence plot", &cfg.work(files::REPORT_DIVERGENCE_SVG), svg.as_bytes())?;

        let users = Table::read(&stage.input("user sentiment", &cfg.work(files::SENTIMENT_USERS))?)?;
        let (uf, um, us) = (users.col("followers")?, users.col("mean")?, users.col("side")?);
        let pts = |side: &str| -> Vec<(f64, f64)> {
            users
                .rows
                .iter()
                .filter(|r| r[us] == side)
                .map(|r| (Table::num(r, uf).log10(), Table::num(r, um)))
                .collect()
        };
        let svg = scatter(
            "Sentiment and popularity",
            "log10 followers",
            "mean compound",
            &[
                Series { label: "left", color: "#1f77b4", points: pts("left") },
                Series { label: "right", color: "#d62728", points: pts("right") },
            ],
        );
        stage.write("popularity plot", &cfg.work(files::REPORT_POPULARITY_SVG), svg.as_bytes())?;
    }
    stage.finish()
}
