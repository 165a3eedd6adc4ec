//! `mambaad`: schedule inspection, kernel checks, pipeline forwarding,
//! metric evaluation, benchmarks and synthetic fixtures.

mod commands;
mod exit;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{bench, eval, forward, scan_order, ssm_check, synth};

#[derive(Debug, Parser)]
#[command(name = "mambaad", version, about)]
struct Cli {
    /// Worker threads for parallel sections (defaults to all cores).
    #[arg(long, global = true, env = "MAMBAAD_WORKERS")]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the pixel order of a scan schedule.
    ScanOrder(scan_order::Args),
    /// Run the scan-kernel equivalence, parallel and gradient suites.
    SsmCheck(ssm_check::Args),
    /// Decode a feature pyramid and write its anomaly map.
    Forward(forward::Args),
    /// Compute image- and pixel-level metrics over a manifest.
    Eval(eval::Args),
    /// Time scan kernels or gather/scatter per scan method.
    Bench(bench::Args),
    /// Write synthetic pyramids, masks and manifests.
    Synth(synth::Args),
}

fn run(cli: Cli) -> anyhow::Result<exit::Status> {
    if let Some(n) = cli.workers {
        anyhow::ensure!(n >= 1, "--workers must be at least 1");
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    match cli.command {
        Command::ScanOrder(a) => scan_order::run(&a),
        Command::SsmCheck(a) => ssm_check::run(&a),
        Command::Forward(a) => forward::run(&a),
        Command::Eval(a) => eval::run(&a),
        Command::Bench(a) => bench::run(&a),
        Command::Synth(a) => synth::run(&a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::USAGE } else { exit::OK });
        }
    };
    match run(cli) {
        Ok(status) => ExitCode::from(status.code()),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit::classify(&e))
        }
    }
}
