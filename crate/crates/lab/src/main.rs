use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rcm_lab::commands::{self, Command, Overrides};
use rcm_lab::config::Format;
use rcm_lab::error::LabError;

/// Simulation and verification experiments for the random connection model.
#[derive(Parser)]
#[command(name = "rcm", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Sample one realisation and write points, edges and clusters.
    Sample(RunArgs),
    /// Sample one planar realisation and draw it as SVG.
    Render(RunArgs),
    /// Tail curve of the origin cluster size.
    Tail(RunArgs),
    /// Mean origin cluster size at one or more intensities.
    Chi(RunArgs),
    /// Box-crossing curves and the critical intensity estimate.
    Scan(RunArgs),
    /// Exponential, supercritical or differential fits (`experiment.kind`).
    Fit(RunArgs),
    /// Lattice against continuum as the mesh is refined.
    Converge(RunArgs),
    /// Exact fixture checks or Monte Carlo checks on a lattice.
    OsssVerify(RunArgs),
    /// Generate exact values on tiny instances.
    OracleFixtures(RunArgs),
    /// Neighbourhood integral bounds and branching comparisons.
    Bounds(RunArgs),
    /// Revealment and pivotal-sum ratios against the weight.
    DiagnoseRatios(RunArgs),
    /// Stochastic domination check on a weight window.
    Dominate(RunArgs),
    /// Rerun the experiment recorded in a manifest.
    Replay {
        manifest: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u128>,
    #[arg(long)]
    samples: Option<u64>,
    /// Accepted for reproducibility records; runs are sequential.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = parse_format)]
    format: Option<Format>,
}

fn parse_format(s: &str) -> Result<Format, String> {
    Format::parse(s).ok_or_else(|| format!("`{s}` is not csv or json"))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Sub::Replay { manifest, out } => commands::replay(&manifest, out),
        sub => {
            let (cmd, a) = match sub {
                Sub::Sample(a) => (Command::Sample, a),
                Sub::Render(a) => (Command::Render, a),
                Sub::Tail(a) => (Command::Tail, a),
                Sub::Chi(a) => (Command::Chi, a),
                Sub::Scan(a) => (Command::Scan, a),
                Sub::Fit(a) => (Command::Fit, a),
                Sub::Converge(a) => (Command::Converge, a),
                Sub::OsssVerify(a) => (Command::OsssVerify, a),
                Sub::OracleFixtures(a) => (Command::OracleFixtures, a),
                Sub::Bounds(a) => (Command::Bounds, a),
                Sub::DiagnoseRatios(a) => (Command::DiagnoseRatios, a),
                Sub::Dominate(a) => (Command::Dominate, a),
                Sub::Replay { .. } => unreachable!(),
            };
            let ov = Overrides { seed: a.seed, samples: a.samples, threads: a.threads, out: a.out, format: a.format };
            commands::run(cmd, &a.config, &ov)
        }
    };
    match result {
        Ok(m) => {
            eprintln!("{}: {} outputs in {:.3} s", m.command, m.outputs.len(), m.wall_time_s.unwrap_or(0.0));
            ExitCode::SUCCESS
        }
        Err(e) => {
            if let LabError::Check(f) = &e {
                println!("{}", serde_json::to_string(f).unwrap_or_default());
            }
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
