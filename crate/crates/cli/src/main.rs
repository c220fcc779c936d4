use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod error;
mod scaling;
mod search;
mod verify;

pub use error::CliError;

/// Stream indices forked off the root seed, one per randomized component.
pub const GROVER_STREAM: u64 = 1;
pub const SCALING_STREAM: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "signlab", version, about = "Sign-estimation reduction laboratory")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "text")]
    format: Format,

    /// Root seed; every random component derives its own stream from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exhaustively check state preparation, readout signs and query counts.
    Verify(verify::VerifyArgs),
    /// Recover a marked label through sign queries.
    Search(Target),
    /// Run the Grover baseline on the same kind of input.
    Grover(Target),
    /// Measure copy cost of the sampling sign estimator against register width.
    Scaling(scaling::ScalingArgs),
}

/// Search input: a planted label or a DIMACS file.
#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("input").required(true).args(["m", "cnf"])))]
pub struct Target {
    /// Register width (required with --m; must match the CNF when both given).
    #[arg(long)]
    n: Option<u32>,
    /// Marked label.
    #[arg(long, requires = "n")]
    m: Option<u64>,
    /// DIMACS CNF file whose unique solution is the marked label.
    #[arg(long)]
    cnf: Option<PathBuf>,
    /// Copies handed to each sign query.
    #[arg(long, default_value_t = 1)]
    k: u64,
    /// Zero-amplitude guard of the sign oracle.
    #[arg(long, default_value_t = signlab::sign::DEFAULT_EPSILON)]
    tolerance: f64,
    /// Accept clauses wider than three literals and tautologies.
    #[arg(long)]
    relaxed: bool,
}

fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Verify(args) => verify::run(&args, cli.format),
        Command::Search(target) => search::run_search(&target, cli.format),
        Command::Grover(target) => search::run_grover(&target, cli.seed, cli.format),
        Command::Scaling(args) => scaling::run(&args, cli.seed, cli.format),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            if let Some(out) = e.report() {
                print!("{out}");
            }
            eprintln!("signlab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
