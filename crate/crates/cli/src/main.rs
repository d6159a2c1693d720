mod commands;
mod config;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use commands::{besov, gen_field, moc, mollify, simulate, Job};
use error::{CliError, CliResult};
use manifest::{now_ms, RunManifest, WallClock};

/// Moduli of continuity, spectral transport runs and Littlewood-Paley
/// diagnostics for active scalar equations.
#[derive(Debug, Parser)]
#[command(name = "mocpde", version)]
struct Cli {
    /// Output directory; created if missing.
    #[arg(long, global = true, default_value = "mocpde-out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the modulus-of-continuity inequalities on a ξ grid.
    MocVerify(moc::VerifyArgs),
    /// Search for (γ, δ) making the inequalities hold.
    MocSearch(moc::SearchArgs),
    /// Run a pseudo-spectral simulation with diagnostics.
    Simulate(simulate::SimArgs),
    /// Convergence rate of the mollified Picard scheme as ε → 0.
    MollifyStudy(mollify::StudyArgs),
    /// Littlewood-Paley profile and Besov norm of a snapshot.
    Besov(besov::BesovArgs),
    /// Write an initial field as a MOCF snapshot.
    GenField(gen_field::GenArgs),
    /// Re-run the job recorded in a manifest.
    Replay { manifest: PathBuf },
}

impl Command {
    fn resolve(&self) -> CliResult<Job> {
        Ok(match self {
            Command::MocVerify(a) => Job::MocVerify(a.resolve()?),
            Command::MocSearch(a) => Job::MocSearch(a.resolve()?),
            Command::Simulate(a) => Job::Simulate(a.resolve()?),
            Command::MollifyStudy(a) => Job::MollifyStudy(a.resolve()?),
            Command::Besov(a) => Job::Besov(a.resolve()?),
            Command::GenField(a) => Job::GenField(a.resolve()?),
            Command::Replay { manifest } => RunManifest::read(manifest)?.job,
        })
    }
}

fn configure_threads() -> CliResult<()> {
    let Ok(text) = std::env::var("MOCPDE_THREADS") else {
        return Ok(());
    };
    let n: usize = text
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Input(format!("MOCPDE_THREADS must be a positive integer, got '{text}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Input(format!("cannot size the thread pool: {e}")))
}

fn run(cli: &Cli) -> CliResult<u8> {
    configure_threads()?;
    let job = cli.command.resolve()?;
    let started_unix_ms = now_ms();
    let clock = Instant::now();
    let done = job.execute(&cli.out)?;
    let code = done.status.code();
    let manifest = RunManifest {
        subcommand: job.name().to_string(),
        seed: job.seed(),
        toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        threads: rayon::current_num_threads(),
        inputs: job.inputs(),
        outputs: done.outputs,
        exit_code: code,
        wall_clock: WallClock { started_unix_ms, elapsed_ms: clock.elapsed().as_millis() },
        job,
    };
    manifest.write(&cli.out)?;
    let label = match code {
        0 => "pass",
        2 => "invalid",
        3 => "FAIL",
        _ => "aborted",
    };
    println!("{}: {label}: {}", manifest.subcommand, done.status.message());
    Ok(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
