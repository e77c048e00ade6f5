//! Batch front end for ladderlab: config parsing, the staged pipeline
//! `check -> construct -> simulate -> estimate -> verify`, and file output.

pub mod commands;
pub mod config;
pub mod io;

use std::fmt;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::{ExperimentConfig, Format, Law};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 1;
    pub const VERIFICATION: i32 = 2;
    pub const CENSORED: i32 = 3;
}

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad flags, bad config, unreadable or stale input files.
    Config(String),
    /// A construction step or an exact check failed.
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::Verification(_) => exit::VERIFICATION,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Verification(m) => write!(f, "verification failed: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

#[derive(Debug, Parser)]
#[command(name = "ladderlab", version, about = "Ladder-epoch moment experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Experiment config (TOML, or JSON by extension).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `outputs.dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker count; overrides `streams`.
    #[arg(long, global = true)]
    pub streams: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Certify the growth conditions.
    Check,
    /// Build the dominating chain and its tail diagnostics.
    Construct,
    /// Simulate ladder epochs.
    Simulate {
        /// Write the full path of one stream instead.
        #[arg(long, value_name = "STREAM")]
        replay: Option<u64>,
    },
    /// Estimate moments of tau from a samples file.
    Estimate {
        #[arg(long)]
        samples: Option<PathBuf>,
    },
    /// Run the coupling, Wald, maximum-tail and finiteness suites.
    Verify {
        #[arg(long)]
        samples: Option<PathBuf>,
    },
}

/// Resolved settings shared by all subcommands.
#[derive(Debug, Clone)]
pub struct Context {
    pub cfg: ExperimentConfig,
    pub out: PathBuf,
    pub format: Format,
}

impl Context {
    pub fn from_cli(cli: &Cli) -> Result<Self, CliError> {
        let path = cli
            .config
            .as_ref()
            .ok_or_else(|| CliError::Config("--config is required".into()))?;
        let mut cfg = ExperimentConfig::load(path)?;
        if let Some(s) = cli.seed {
            cfg.seed = s;
        }
        if let Some(s) = cli.streams {
            cfg.streams = s;
        }
        if let Some(f) = cli.format {
            cfg.outputs.format = f;
        }
        if let Some(o) = &cli.out {
            cfg.outputs.dir = Some(o.clone());
        }
        let out = cfg.outputs.dir.clone().unwrap_or_else(|| PathBuf::from("ladderlab-out"));
        let format = cfg.outputs.format;
        Ok(Self { cfg, out, format })
    }
}

pub fn run(cli: &Cli) -> i32 {
    let result = Context::from_cli(cli).and_then(|ctx| {
        io::ensure_dir(&ctx.out)?;
        match &cli.command {
            Command::Check => commands::check(&ctx),
            Command::Construct => commands::construct(&ctx),
            Command::Simulate { replay } => commands::simulate(&ctx, *replay),
            Command::Estimate { samples } => commands::estimate(&ctx, samples.as_deref()),
            Command::Verify { samples } => commands::verify(&ctx, samples.as_deref()),
        }
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("ladderlab: {e}");
            e.exit_code()
        }
    }
}

/// Parses `args` (program name first) and runs; usage errors exit with 1.
pub fn run_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() { exit::CONFIG } else { exit::OK }
        }
    }
}
