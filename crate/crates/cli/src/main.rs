//! `ttcsw` command-line front end.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error,
//! 3 backend error.

mod backends;
mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::{
    AlignArgs, CswArgs, DictCswArgs, EvalArgs, IngestArgs, PredictArgs, StatsArgs, SweepArgs, TtaArgs,
};
use crate::config::Settings;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(ttcsw::Error),
}

impl From<ttcsw::Error> for CliError {
    fn from(e: ttcsw::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Core(e) if e.is_backend() => 3,
            CliError::Core(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Core(e) if e.is_backend() => write!(f, "backend: {e}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "ttcsw", version, about = "Cross-lingual aspect sentiment triplet extraction toolkit")]
struct Cli {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Response cache directory for every backend.
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Serve backend calls from the cache only; a miss is an error.
    #[arg(long, global = true)]
    replay: bool,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Fail on the first backend error instead of degrading.
    #[arg(long, global = true)]
    strict: bool,
    /// Repeat for more log output.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Convert a structured sentiment dataset into a triplet corpus.
    Ingest(IngestArgs),
    /// Dataset statistics.
    Stats(StatsArgs),
    /// Translate with term markup and build CT and CSW corpora.
    BuildCsw(CswArgs),
    /// Word-level code-switching through a bilingual lexicon.
    BuildDictCsw(DictCswArgs),
    /// Build alignment training examples from parallel term pairs.
    BuildAlign(AlignArgs),
    /// Plain triplet prediction.
    Predict(PredictArgs),
    /// Prediction with test-time augmentation.
    Tta(TtaArgs),
    /// Score predictions, or the all-null baseline, against gold corpora.
    Eval(EvalArgs),
    /// TTA over a grid of n-gram lengths and candidate counts.
    Sweep(SweepArgs),
}

pub struct Context {
    pub settings: Settings,
    pub seed: u64,
    pub jobs: Option<usize>,
    pub replay: bool,
    pub strict: bool,
    pub digest: String,
}

impl Context {
    pub fn provenance(&self) -> ttcsw::artifact::Provenance {
        ttcsw::artifact::Provenance {
            seed: Some(self.seed),
            config_digest: Some(self.digest.clone()),
        }
    }
}

fn context(cli: &Cli) -> Result<Context, CliError> {
    let mut settings = Settings::load(cli.config.as_deref(), |k| std::env::var(k).ok())?;
    if let Some(s) = cli.seed {
        settings.set("seed", s);
    }
    if let Some(d) = &cli.cache_dir {
        settings.set("cache_dir", d.display());
    }
    if let Some(j) = cli.jobs {
        settings.set("jobs", j);
    }
    let seed = settings.parse::<u64>("seed")?.unwrap_or(0);
    let jobs = settings.parse::<usize>("jobs")?;
    if jobs == Some(0) {
        return Err(CliError::Usage("jobs must be at least 1".into()));
    }
    let digest = settings.digest(&format!("{:?}|strict={}", cli.command, cli.strict));
    Ok(Context {
        settings,
        seed,
        jobs,
        replay: cli.replay,
        strict: cli.strict,
        digest,
    })
}

fn run(cli: Cli) -> Result<(), CliError> {
    let ctx = context(&cli)?;
    match cli.command {
        Command::Ingest(a) => commands::ingest(&ctx, a),
        Command::Stats(a) => commands::stats(&ctx, a),
        Command::BuildCsw(a) => commands::build_csw(&ctx, a),
        Command::BuildDictCsw(a) => commands::build_dict_csw(&ctx, a),
        Command::BuildAlign(a) => commands::build_align(&ctx, a),
        Command::Predict(a) => commands::predict(&ctx, a),
        Command::Tta(a) => commands::tta(&ctx, a),
        Command::Eval(a) => commands::eval(&ctx, a),
        Command::Sweep(a) => commands::sweep(&ctx, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
