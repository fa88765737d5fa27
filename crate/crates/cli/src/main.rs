//! `ek-lab`: reproducible E_k experiments.
//!
//! Exit codes: 0 success, 1 certificate failure or unexpected error,
//! 2 config error, 3 admissibility or path error, 4 incomplete flow.

mod config;
mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use config::{ExperimentConfig, Overrides};
use run::{Command, Status};

#[global_allocator]
static GLOBAL: mimalloc::MiMalloc = mimalloc::MiMalloc;

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_ADMISSIBILITY: u8 = 3;
const EXIT_INCOMPLETE: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "ek-lab", version, about = "E_k energies, critical equations and Kähler-Einstein certificates")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// TOML experiment manifest.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Seed of every random perturbation.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Comma-separated list of k values.
    #[arg(long, global = true, value_name = "LIST", value_delimiter = ',')]
    k: Option<Vec<usize>>,

    /// Radial nodes M (projective) or nodes per axis N (torus).
    #[arg(long, global = true, value_name = "M")]
    nodes: Option<usize>,

    /// `projective` or `torus`.
    #[arg(long, global = true, value_name = "NAME")]
    testbed: Option<String>,

    /// Complex dimension.
    #[arg(long, global = true)]
    n: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Cmd {
    /// Per-node σ_k and Σ_k with a positivity report.
    Sigma,
    /// E_k along the configured path.
    Energy,
    /// Critical-equation residuals and brackets of the starting metric.
    Residual,
    /// Gradient flow of E_k, then the certificate on the final metric.
    Flow,
    /// Certificate on the starting metric.
    Verify,
    /// sigma, energy, residual and flow in turn.
    All,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Sigma => Command::Sigma,
            Cmd::Energy => Command::Energy,
            Cmd::Residual => Command::Residual,
            Cmd::Flow => Command::Flow,
            Cmd::Verify => Command::Verify,
            Cmd::All => Command::All,
        }
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let base = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let testbed = cli.testbed.as_deref().map(str::parse).transpose().context("flag `--testbed`")?;
    base.resolve(Overrides {
        testbed,
        n: cli.n,
        nodes: cli.nodes,
        k: cli.k.clone(),
        seed: cli.seed,
        out: cli.out.clone(),
    })
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("EK_LAB_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .with_context(|| format!("EK_LAB_THREADS = `{value}` is not a positive integer"))?;
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    Ok(())
}

/// Exit code for an error raised while running an experiment.
fn error_code(err: &anyhow::Error) -> u8 {
    use eklab::Error as E;
    match err.chain().find_map(|c| c.downcast_ref::<E>()) {
        Some(E::Admissibility { .. } | E::Path { .. }) => EXIT_ADMISSIBILITY,
        Some(E::Domain(_) | E::NotApplicable(_) | E::Budget { .. } | E::GridMismatch { .. }) => EXIT_CONFIG,
        _ => EXIT_FAILURE,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match configure_threads().and_then(|()| load_config(&cli)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e:#}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    match run::execute(cli.command.into(), &config) {
        Ok(Status::Success) => ExitCode::SUCCESS,
        Ok(Status::CertificateFailed) => {
            eprintln!("certificate failed");
            ExitCode::from(EXIT_FAILURE)
        }
        Ok(Status::Incomplete) => {
            eprintln!("flow incomplete");
            ExitCode::from(EXIT_INCOMPLETE)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(error_code(&e))
        }
    }
}
