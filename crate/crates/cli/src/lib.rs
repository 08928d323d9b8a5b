//! Pipeline orchestration for the lexical-divergence toolkit: configuration,
//! one subcommand per stage, run manifests, the annotation server and the
//! synthetic fixture generator.

pub mod artifacts;
pub mod commands;
pub mod config;
pub mod error;
pub mod fixture;
pub mod server;
pub mod svg;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::artifacts::{sweep_temp_files, Manifest, WorkLock};
use crate::config::PipelineConfig;
use crate::error::{CliError, CliResult};
use crate::fixture::{make_fixture, FixtureSpec};

/// Used when `--config` is absent and the file exists in the current directory.
pub const DEFAULT_CONFIG: &str = "lexdiv.toml";

#[derive(Debug, Parser)]
#[command(name = "lexdiv", version, about = "Partisan lexical divergence pipeline")]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, short, global = true)]
    pub config: Option<PathBuf>,
    /// Override a configuration value, e.g. `--set embed.dim=100`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Assign users to sides, filter and cap their posts.
    Delineate,
    /// Clean, tokenize and lemmatize the delineated corpus.
    Clean,
    /// Type/token statistics before and after preprocessing.
    Stats,
    /// Per-lexeme frequency report.
    Freq,
    /// Sentiment series, side effect and popularity regression.
    Sentiment,
    /// Train left, right and pooled embeddings.
    Embed {
        /// Search the `[tune]` grid first and train with the best point.
        #[arg(long)]
        tune: bool,
    },
    /// Align the right embedding onto the left.
    Align,
    /// Rank shared lexemes by cross-side distance.
    Diverge,
    /// Cluster posts and project them to two dimensions.
    Topics,
    /// Evaluate the side classifier.
    Classify,
    /// Collect headline numbers and plots.
    Report,
    /// Run every deterministic stage in order.
    All {
        #[arg(long)]
        tune: bool,
    },
    /// Annotation sessions.
    #[command(subcommand)]
    Annotate(AnnotateCommand),
    /// Write a synthetic corpus with planted effects.
    MakeFixture(FixtureArgs),
    /// Configuration helpers.
    #[command(subcommand)]
    Config(ConfigCommand),
}

#[derive(Debug, Subcommand)]
pub enum AnnotateCommand {
    /// Sample passages and create a session.
    Build {
        #[arg(long = "target")]
        targets: Vec<String>,
        #[arg(long)]
        session: Option<String>,
    },
    /// Serve the annotation API.
    Serve {
        #[arg(long)]
        host: Option<String>,
        #[arg(long)]
        port: Option<u16>,
    },
    /// Divergence and polysemy scores of a completed session.
    Score {
        #[arg(long)]
        session: Option<String>,
        #[arg(long = "annotator")]
        annotators: Vec<String>,
    },
    /// Rate a session with a chat-completion model.
    Llm {
        #[arg(long)]
        session: Option<String>,
    },
    /// Rank correlation between two annotators.
    Agreement {
        #[arg(long)]
        session: Option<String>,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
    },
}

#[derive(Debug, Args)]
pub struct FixtureArgs {
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// TOML fixture spec; defaults apply to absent keys.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub users_per_side: Option<usize>,
    #[arg(long)]
    pub tweets_per_user: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum ConfigCommand {
    /// Print the effective configuration.
    Show,
    /// Print the configuration hash recorded in artifacts.
    Hash,
}

/// What a command produced.
#[derive(Debug)]
pub enum Outcome {
    Manifests(Vec<Manifest>),
    Text(String),
    Served,
}

pub fn load_config(cli: &Cli, cwd: &Path) -> CliResult<PipelineConfig> {
    let file = match &cli.config {
        Some(p) => Some(if p.is_relative() { cwd.join(p) } else { p.clone() }),
        None => Some(cwd.join(DEFAULT_CONFIG)).filter(|p| p.is_file()),
    };
    PipelineConfig::load(file.as_deref(), &cli.overrides, cwd)
}

fn stage(cfg: &PipelineConfig, name: &str, tune: bool) -> CliResult<Manifest> {
    use crate::commands as c;
    match name {
        "delineate" => c::delineate(cfg),
        "clean" => c::clean(cfg),
        "stats" => c::stats(cfg),
        "freq" => c::freq(cfg),
        "sentiment" => c::sentiment(cfg),
        "embed" => c::embed(cfg, tune),
        "align" => c::align(cfg),
        "diverge" => c::diverge(cfg),
        "topics" => c::topics(cfg),
        "classify" => c::classify(cfg),
        "report" => c::report(cfg),
        other => Err(CliError::Config(format!("unknown stage `{other}`"))),
    }
}

/// Runs stages under the working-directory lock.
pub fn run_stages(cfg: &PipelineConfig, names: &[&str], tune: bool) -> CliResult<Vec<Manifest>> {
    let _lock = WorkLock::acquire(&cfg.paths.work_dir)?;
    sweep_temp_files(&cfg.paths.work_dir)?;
    names.iter().map(|n| stage(cfg, n, tune)).collect()
}

fn locked<T>(cfg: &PipelineConfig, f: impl FnOnce() -> CliResult<T>) -> CliResult<T> {
    let _lock = WorkLock::acquire(&cfg.paths.work_dir)?;
    sweep_temp_files(&cfg.paths.work_dir)?;
    f()
}

pub fn execute(cli: &Cli, cwd: &Path) -> CliResult<Outcome> {
    use crate::commands as c;
    if let Command::MakeFixture(a) = &cli.command {
        let mut spec = match &a.spec {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|_| CliError::missing("fixture spec", p))?;
                toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
            }
            None => FixtureSpec::default(),
        };
        if let Some(s) = a.seed {
            spec.seed = s;
        }
        if let Some(n) = a.users_per_side {
            spec.users_per_side = n;
        }
        if let Some(n) = a.tweets_per_user {
            spec.tweets_per_user = n;
        }
        let out = if a.out.is_relative() { cwd.join(&a.out) } else { a.out.clone() };
        let f = make_fixture(&spec, &out)?;
        return Ok(Outcome::Text(format!(
            "wrote {} posts for {} + {} users to {}\nconfig: {}\n",
            f.posts,
            f.left_users.len(),
            f.right_users.len(),
            f.dir.display(),
            f.config_path.display()
        )));
    }
    let mut cfg = load_config(cli, cwd)?;
    Ok(match &cli.command {
        Command::Config(ConfigCommand::Show) => Outcome::Text(cfg.to_toml_string()?),
        Command::Config(ConfigCommand::Hash) => Outcome::Text(format!("{}\n", cfg.hash())),
        Command::Delineate => Outcome::Manifests(run_stages(&cfg, &["delineate"], false)?),
        Command::Clean => Outcome::Manifests(run_stages(&cfg, &["clean"], false)?),
        Command::Stats => Outcome::Manifests(run_stages(&cfg, &["stats"], false)?),
        Command::Freq => Outcome::Manifests(run_stages(&cfg, &["freq"], false)?),
        Command::Sentiment => Outcome::Manifests(run_stages(&cfg, &["sentiment"], false)?),
        Command::Embed { tune } => Outcome::Manifests(run_stages(&cfg, &["embed"], *tune)?),
        Command::Align => Outcome::Manifests(run_stages(&cfg, &["align"], false)?),
        Command::Diverge => Outcome::Manifests(run_stages(&cfg, &["diverge"], false)?),
        Command::Topics => Outcome::Manifests(run_stages(&cfg, &["topics"], false)?),
        Command::Classify => Outcome::Manifests(run_stages(&cfg, &["classify"], false)?),
        Command::Report => Outcome::Manifests(run_stages(&cfg, &["report"], false)?),
        Command::All { tune } => Outcome::Manifests(run_stages(&cfg, c::DETERMINISTIC_STAGES, *tune)?),
        Command::Annotate(a) => match a {
            AnnotateCommand::Build { targets, session } => {
                Outcome::Manifests(vec![locked(&cfg, || c::annotate_build(&cfg, targets, session.as_deref()))?])
            }
            AnnotateCommand::Serve { host, port } => {
                if let Some(h) = host {
                    cfg.annotate.host = h.clone();
                }
                if let Some(p) = port {
                    cfg.annotate.port = *p;
                }
                locked(&cfg, || c::annotate_serve(&cfg))?;
                Outcome::Served
            }
            AnnotateCommand::Score { session, annotators } => {
                Outcome::Manifests(vec![locked(&cfg, || c::annotate_score(&cfg, session.as_deref(), annotators))?])
            }
            AnnotateCommand::Llm { session } => {
                Outcome::Manifests(vec![locked(&cfg, || c::annotate_llm(&cfg, session.as_deref()))?])
            }
            AnnotateCommand::Agreement { session, a, b } => {
                Outcome::Manifests(vec![locked(&cfg, || c::annotate_agreement(&cfg, session.as_deref(), a, b))?])
            }
        },
        Command::MakeFixture(_) => unreachable!("handled above"),
    })
}
