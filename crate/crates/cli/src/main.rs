//! `hopf`: rigidity bounds, δ estimates and identity checks for convex
//! billiards and conformally flat tori, reported as JSON.

mod commands;
mod error;
mod report;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use commands::{
    BilliardDeltaArgs, BilliardVerifyArgs, CurveArgs, CurveInfoArgs, MetricArgs, Output, TorusBoundArgs,
    TorusDeltaArgs,
};
use error::{CliError, CliResult};
use report::{RunReport, Timing, SCHEMA_VERSION};

#[derive(Debug, Parser)]
#[command(name = "hopf", version, about = "Quantitative Hopf rigidity for billiards and conformal tori")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Perimeter, area, minimal curvature and Gauss-Bonnet residual of a table.
    CurveInfo {
        #[command(flatten)]
        args: CurveInfoArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lower bounds on δ for a billiard table.
    BilliardBound {
        #[command(flatten)]
        args: CurveArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo estimate of δ for a billiard table, with the bounds for comparison.
    BilliardDelta {
        #[command(flatten)]
        args: BilliardDeltaArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Residuals of the exact phase-space and variational identities.
    BilliardVerify {
        #[command(flatten)]
        args: BilliardVerifyArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Curvature norms and volume of a conformal torus metric.
    TorusCurvature {
        #[command(flatten)]
        args: MetricArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lower bound on δ for a conformal torus metric.
    TorusBound {
        #[command(flatten)]
        args: TorusBoundArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo estimate of δ for a conformal 2-torus, with the bound for comparison.
    TorusDelta {
        #[command(flatten)]
        args: TorusDeltaArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parameter sweep written as CSV; the JSON report goes to stdout or --report.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// CSV destination.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, default_value_t = commands::default_workers())]
        workers: usize,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::CurveInfo { .. } => "curve-info",
            Command::BilliardBound { .. } => "billiard-bound",
            Command::BilliardDelta { .. } => "billiard-delta",
            Command::BilliardVerify { .. } => "billiard-verify",
            Command::TorusCurvature { .. } => "torus-curvature",
            Command::TorusBound { .. } => "torus-bound",
            Command::TorusDelta { .. } => "torus-delta",
            Command::Sweep { .. } => "sweep",
        }
    }

    fn run(&self) -> CliResult<(Output, Option<&PathBuf>)> {
        match self {
            Command::CurveInfo { args, out } => Ok((commands::curve_info(args)?, out.as_ref())),
            Command::BilliardBound { args, out } => Ok((commands::billiard_bound(args)?, out.as_ref())),
            Command::BilliardDelta { args, out } => Ok((commands::billiard_delta(args)?, out.as_ref())),
            Command::BilliardVerify { args, out } => Ok((commands::billiard_verify(args)?, out.as_ref())),
            Command::TorusCurvature { args, out } => Ok((commands::torus_curvature(args)?, out.as_ref())),
            Command::TorusBound { args, out } => Ok((commands::torus_bound(args)?, out.as_ref())),
            Command::TorusDelta { args, out } => Ok((commands::torus_delta(args)?, out.as_ref())),
            Command::Sweep { config, out, report, workers } => {
                Ok((sweep::run_sweep(config, out, *workers)?, report.as_ref()))
            }
        }
    }
}

fn execute(cli: &Cli) -> CliResult<()> {
    let start = Instant::now();
    let (output, dest) = cli.command.run()?;
    let report = RunReport {
        schema_version: SCHEMA_VERSION,
        command: cli.command.name().to_string(),
        inputs: output.inputs,
        tolerances: output.tolerances,
        outputs: output.outputs,
        rng: hopf_core::sampling::RNG_ID.to_string(),
        timing: Timing { wall_seconds: start.elapsed().as_secs_f64(), workers: output.workers },
    };
    report.write(dest.map(PathBuf::as_path))?;
    match output.failure {
        Some(msg) => Err(CliError::Consistency(msg)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
