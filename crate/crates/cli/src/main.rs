use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod boundary_cmd;
mod failure;
mod input;
mod simulate_cmd;
mod test_cmd;

use failure::Failure;

/// Tests for equality of two high-dimensional covariance matrices.
#[derive(Debug, Parser)]
#[command(name = "covthresh", version)]
struct Cli {
    /// Worker threads for bootstrap and simulation loops (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Master seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Test a pair of data sets.
    Test(test_cmd::TestArgs),
    /// Run a size or power study.
    Simulate(SimulateArgs),
    /// Emit the detection-boundary table.
    Boundary(boundary_cmd::BoundaryArgs),
    /// Re-validate a boundary table produced by `boundary`.
    BoundaryCheck(boundary_cmd::CheckArgs),
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(value_enum)]
    kind: simulate_cmd::StudyKind,
    #[command(flatten)]
    opts: simulate_cmd::SimulateOpts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Dist {
    Gaussian,
    Gamma,
}

fn open_output(path: Option<&PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
        .map_err(|e| Failure::Input(format!("cannot start thread pool: {e}")))?;
    // Compute first so a failed run leaves no partial output file behind.
    let text = match &cli.command {
        Command::Test(args) => test_cmd::run(args, cli.seed)?,
        Command::Simulate(args) => simulate_cmd::run(args.kind, &args.opts, cli.seed)?,
        Command::Boundary(args) => boundary_cmd::run(args)?,
        Command::BoundaryCheck(args) => boundary_cmd::check(args)?,
    };
    let mut out = open_output(cli.out.as_ref())
        .map_err(|e| Failure::Input(format!("cannot open output: {e}")))?;
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| Failure::Input(format!("cannot write output: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
