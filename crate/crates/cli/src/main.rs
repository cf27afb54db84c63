use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use specstat_cli::config::{parse_config, Format, Kind};
use specstat_cli::runner::{execute, resolve_workers};
use specstat_cli::CliResult;

#[derive(Parser)]
#[command(name = "specstat", version, about = "Ensemble experiments on random one-dimensional Schrödinger operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrated density of states on an energy grid.
    Ids(Common),
    /// Local level statistics against a Poisson process.
    Levelstats(Common),
    /// Joint level counts near two distinct energies.
    Joint(Common),
    /// Wegner estimate `P(σ ∩ I ≠ ∅)` against `|I|·L`.
    Wegner(Common),
    /// Minami estimate for two or more eigenvalues in a window.
    Minami(Common),
    /// Eigenvalue-pair decorrelation in small boxes.
    Decorrelate(Common),
    /// Randomised checks of the deterministic lemmas.
    Props(Common),
    /// Eigenvalue gradients, colinearity and Jacobian diagnostics.
    Gradients(Common),
}

#[derive(Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Overrides `ensemble.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `ensemble.workers`.
    #[arg(long, env = "SPECSTAT_WORKERS")]
    workers: Option<usize>,
    /// Overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `output.format`.
    #[arg(long)]
    format: Option<Format>,
}

impl Command {
    fn split(self) -> (Kind, Common) {
        match self {
            Command::Ids(c) => (Kind::Ids, c),
            Command::Levelstats(c) => (Kind::LevelStats, c),
            Command::Joint(c) => (Kind::Joint, c),
            Command::Wegner(c) => (Kind::Wegner, c),
            Command::Minami(c) => (Kind::Minami, c),
            Command::Decorrelate(c) => (Kind::Decorrelate, c),
            Command::Props(c) => (Kind::Props, c),
            Command::Gradients(c) => (Kind::Gradients, c),
        }
    }
}

fn run(cli: Cli, command: &str) -> CliResult<()> {
    let (kind, common) = cli.command.split();
    let mut cfg = parse_config(&common.config, kind)?;
    if let Some(s) = common.seed {
        cfg.ensemble.seed = s;
    }
    if let Some(d) = common.out {
        cfg.output.dir = d;
    }
    if let Some(f) = common.format {
        cfg.output.format = f;
    }
    let workers = resolve_workers(common.workers, cfg.ensemble.workers)?;
    let manifest = execute(&cfg, workers, command)?;
    for w in &manifest.warnings {
        eprintln!("warning: {w}");
    }
    println!(
        "{} files written to {} (config {})",
        manifest.files.len(),
        cfg.output.dir.display(),
        &manifest.config_hash[..12]
    );
    Ok(())
}

fn main() -> ExitCode {
    let command = std::env::args().collect::<Vec<_>>().join(" ");
    match run(Cli::parse(), &command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
