//! `nnls` — command-line surface for the nonlocal NLS scattering pipeline:
//! direct scattering, discrete-spectrum search, reflectionless synthesis,
//! split-step evolution, long-time asymptotics, and a compare harness that
//! produces decay-fit reports.
//!
//! Exit codes: 0 success, 2 config/ingestion failure, 3 invariant-diagnostic
//! failure, 4 runtime pipeline failure.

mod commands;
mod config;
mod output;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{RunConfig, Tolerances};

#[derive(Debug)]
pub enum CliError {
    /// bad config, ingestion, or flag values → exit 2
    Config(String),
    /// an invariant diagnostic exceeded its tolerance → exit 3
    Diagnostic(String),
    /// a pipeline stage failed at runtime → exit 4
    Pipeline(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Diagnostic(_) => 3,
            CliError::Pipeline(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Diagnostic(m) => write!(f, "diagnostic failure: {m}"),
            CliError::Pipeline(m) => write!(f, "pipeline failure: {m}"),
        }
    }
}

#[derive(Args, Debug)]
struct Common {
    /// path to the JSON run configuration
    #[arg(long)]
    config: PathBuf,
    /// output directory (created if missing)
    #[arg(long)]
    out: PathBuf,
    /// worker threads for k-grids and rays (0 = automatic)
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// override a named tolerance, e.g. --tol-override det_s=1e-7
    #[arg(long = "tol-override", value_name = "NAME=VALUE")]
    tol_override: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Reflection/transmission coefficients on a real k-grid plus
    /// symmetry and unimodularity diagnostics
    Scatter(Common),
    /// Discrete spectrum: transmission zeros and norming constants
    Spectrum(Common),
    /// Reflectionless field q_sol on an (x, t) grid from a spectrum
    Soliton(Common),
    /// Split-step PDE evolution with conserved-quantity logging
    Evolve(Common),
    /// Long-time asymptotic field along rays xi = x/(4t)
    Asymptote(Common),
    /// PDE oracle versus asymptotics/soliton with decay-fit report
    Compare(Common),
}

#[derive(Parser, Debug)]
#[command(name = "nnls", version, about = "nonlocal NLS scattering toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

fn run(cmd: &Command) -> Result<(), CliError> {
    let (name, common) = match cmd {
        Command::Scatter(c) => ("scatter", c),
        Command::Spectrum(c) => ("spectrum", c),
        Command::Soliton(c) => ("soliton", c),
        Command::Evolve(c) => ("evolve", c),
        Command::Asymptote(c) => ("asymptote", c),
        Command::Compare(c) => ("compare", c),
    };
    let _ = name;
    if common.threads > 0 {
        // a later invocation in the same process may have set the pool
        // already; that is fine
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(common.threads)
            .build_global();
    }
    let mut tols = Tolerances::defaults();
    tols.apply_overrides(&common.tol_override)?;
    let (cfg, echo) = RunConfig::load(&common.config)?;
    let config_dir = common
        .config
        .parent()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&common.out)
        .map_err(|e| CliError::Config(format!("cannot create output dir: {e}")))?;
    let out = common.out.as_path();
    match cmd {
        Command::Scatter(_) => commands::cmd_scatter(&cfg, &echo, &config_dir, out, &tols),
        Command::Spectrum(_) => commands::cmd_spectrum(&cfg, &echo, &config_dir, out, &tols),
        Command::Soliton(_) => commands::cmd_soliton(&cfg, &echo, out, &tols),
        Command::Evolve(_) => commands::cmd_evolve(&cfg, &echo, &config_dir, out, &tols),
        Command::Asymptote(_) => commands::cmd_asymptote(&cfg, &echo, &config_dir, out, &tols),
        Command::Compare(_) => commands::cmd_compare(&cfg, &echo, &config_dir, out, &tols),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nnls: {e}");
            if let CliError::Pipeline(_) = e {
                let out = match &cli.command {
                    Command::Scatter(c)
                    | Command::Spectrum(c)
                    | Command::Soliton(c)
                    | Command::Evolve(c)
                    | Command::Asymptote(c)
                    | Command::Compare(c) => &c.out,
                };
                let name = match &cli.command {
                    Command::Scatter(_) => "scatter",
                    Command::Spectrum(_) => "spectrum",
                    Command::Soliton(_) => "soliton",
                    Command::Evolve(_) => "evolve",
                    Command::Asymptote(_) => "asymptote",
                    Command::Compare(_) => "compare",
                };
                output::write_failure_manifest(out, name, &e);
            }
            ExitCode::from(e.exit_code())
        }
    }
}
