//! The `msa` command line: vignette generation, gold and synthesized
//! runs, LM baselines and evaluation, each leaving a run manifest.

mod commands;
mod files;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use files::{load_vignettes, read_json, write_atomic, RunManifest, JUDGMENTS, MANIFEST};

use crate::lm::{BackendDescriptor, BackendKind};
use crate::metrics::Metric;
use crate::olympics::Experiment;
use crate::synthesis::BaselineMode;

/// Exit status for success.
pub const EXIT_OK: i32 = 0;
/// Bad flags, unreadable configuration, or a missing required input.
pub const EXIT_USAGE: i32 = 1;
/// A stage, inference or evaluation step failed.
pub const EXIT_FAILURE: i32 = 2;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Failure(_) => EXIT_FAILURE,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "msa", version, about = "Synthesize and evaluate ad-hoc probabilistic models of sports vignettes")]
pub struct Cli {
    /// Worker threads for participants and vignettes (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the vignettes of one experiment, one JSON file each.
    Generate(GenerateArgs),
    /// Run the hand-written gold model of every vignette.
    Gold(GoldArgs),
    /// Run the LM-guided synthesis pipeline.
    Msa(MsaArgs),
    /// Ask the LM for slider answers directly.
    Baseline(BaselineArgs),
    /// Compare model judgments against human judgments.
    Eval(EvalArgs),
    /// Write mock backend scripts that answer every stage with the gold
    /// parse and gold model.
    MockScript(MockScriptArgs),
    /// Re-execute the command recorded in a manifest.
    Rerun(RerunArgs),
}

fn parse_experiment(s: &str) -> Result<Experiment, String> {
    s.parse().map_err(|e: crate::olympics::OlympicsError| e.to_string())
}

fn parse_metric(s: &str) -> Result<Metric, String> {
    s.parse().map_err(|e: crate::metrics::MetricsError| e.to_string())
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// e1, e2 or e3.
    #[arg(long, value_parser = parse_experiment)]
    pub experiment: Experiment,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Commentary sentences by vignette index (JSON); required for e3.
    #[arg(long)]
    pub commentary: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GoldArgs {
    /// Vignette files or directories of them.
    #[arg(long, num_args = 1.., required = true)]
    pub vignettes: Vec<PathBuf>,
    /// Posterior samples per participant.
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    /// Simulated participants per vignette, each with its own seed.
    #[arg(long, default_value_t = 10)]
    pub participants: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Gold model parameters (JSON); defaults when absent.
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendChoice {
    Mock,
    Http,
    Replay,
}

#[derive(Debug, Args)]
pub struct BackendArgs {
    #[arg(long, value_enum)]
    pub backend: BackendChoice,
    /// Mock script file or directory of scripts.
    #[arg(long)]
    pub script: Option<PathBuf>,
    /// Chat-completions URL for the http backend.
    #[arg(long)]
    pub endpoint: Option<String>,
    #[arg(long)]
    pub model: Option<String>,
    /// Environment variable holding the API key.
    #[arg(long, default_value = "MSA_API_KEY")]
    pub credential_env: String,
    /// Response cache: recorded into by http, served by replay.
    #[arg(long)]
    pub cache: Option<PathBuf>,
}

impl BackendArgs {
    pub fn descriptor(&self) -> Result<BackendDescriptor, CliError> {
        let need = |flag: &str| CliError::Usage(format!("--backend {} needs {flag}", self.kind_name()));
        let mut d = BackendDescriptor {
            kind: BackendKind::Mock,
            endpoint: None,
            credential_env: None,
            cache_path: None,
            script_path: None,
            model_name: self.model.clone(),
        };
        match self.backend {
            BackendChoice::Mock => d.script_path = Some(self.script.clone().ok_or_else(|| need("--script"))?),
            BackendChoice::Http => {
                d.kind = BackendKind::Http;
                d.endpoint = Some(self.endpoint.clone().ok_or_else(|| need("--endpoint"))?);
                d.credential_env = Some(self.credential_env.clone());
                d.cache_path = self.cache.clone();
            }
            BackendChoice::Replay => {
                d.kind = BackendKind::Replay;
                d.cache_path = Some(self.cache.clone().ok_or_else(|| need("--cache"))?);
            }
        }
        Ok(d)
    }

    fn kind_name(&self) -> &'static str {
        match self.backend {
            BackendChoice::Mock => "mock",
            BackendChoice::Http => "http",
            BackendChoice::Replay => "replay",
        }
    }
}

#[derive(Debug, Args)]
pub struct MsaArgs {
    #[arg(long, num_args = 1.., required = true)]
    pub vignettes: Vec<PathBuf>,
    /// Pipeline configuration (JSON); flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub backend: BackendArgs,
    #[arg(long)]
    pub participants: Option<usize>,
    /// Posterior samples per participant.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeChoice {
    Direct,
    Cot,
}

impl From<ModeChoice> for BaselineMode {
    fn from(m: ModeChoice) -> Self {
        match m {
            ModeChoice::Direct => BaselineMode::Direct,
            ModeChoice::Cot => BaselineMode::Cot,
        }
    }
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[arg(long, value_enum)]
    pub mode: ModeChoice,
    #[arg(long, num_args = 1.., required = true)]
    pub vignettes: Vec<PathBuf>,
    #[command(flatten)]
    pub backend: BackendArgs,
    #[arg(long, default_value_t = 10)]
    pub participants: usize,
    /// Answers per question per participant.
    #[arg(long, default_value_t = 5)]
    pub responses: usize,
    #[arg(long, default_value_t = 1.0)]
    pub temperature: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Human judgment set (JSON).
    #[arg(long)]
    pub human: PathBuf,
    /// Run directories (holding judgments.json) or judgment set files,
    /// merged into one model set.
    #[arg(long, num_args = 1.., required = true)]
    pub runs: Vec<PathBuf>,
    /// Vignettes supplying sport and query types when the judgment sets
    /// lack them.
    #[arg(long, num_args = 1..)]
    pub vignettes: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',', value_parser = parse_metric, default_value = "wd,tvd,r2")]
    pub metrics: Vec<Metric>,
    /// Add the human split-half baseline.
    #[arg(long)]
    pub split_half: bool,
    /// Bootstrap and split-half replicates; 0 skips intervals.
    #[arg(long, default_value_t = 1000)]
    pub n_boot: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MockScriptArgs {
    #[arg(long, num_args = 1.., required = true)]
    pub vignettes: Vec<PathBuf>,
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RerunArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Where the re-executed run writes; the recorded --out is dropped.
    #[arg(long)]
    pub out: PathBuf,
}

/// Parse `args` (without the program name), execute, and return the exit
/// code. Messages go to stderr.
pub fn run(args: Vec<String>) -> i32 {
    let argv = std::iter::once("msa".to_string()).chain(args.iter().cloned());
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match commands::dispatch(cli, args) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
