mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::commands::CliError;

#[derive(Parser, Debug)]
#[command(name = "dqopt", version, about = "Distributed QAOA for dense QUBOs and multilayer filter design")]
pub struct Cli {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker pool size (default: logical CPUs, capped at p).
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub workers: Option<u64>,

    /// Leave wall-clock timestamps out of manifests.
    #[arg(long, global = true)]
    pub deterministic: bool,

    /// Root seed (fallback: config file, then DQOPT_SEED, then 0).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Repeat for more log output.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a random Gaussian QUBO.
    GenQubo(GenQuboArgs),
    /// Solve a QUBO file.
    Solve(SolveArgs),
    /// Approximation ratio and time-to-solution over generated instances.
    Bench(BenchArgs),
    /// Decode a layer structure and compute its figure of merit.
    Evaluate(EvaluateArgs),
    /// Active-learning filter design.
    AlDesign(AlArgs),
    /// Inspect the QAOA state for a small QUBO.
    QaoaDebug(QaoaDebugArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CliMode {
    Dqaoa,
    #[value(name = "dq-qaoa")]
    DqQaoa,
    Dc,
    Brute,
    Sa,
}

#[derive(Args, Debug, Clone, Default)]
pub struct QaoaFlags {
    /// QAOA layers per sub-solve.
    #[arg(long)]
    pub layers: Option<usize>,
    /// Objective evaluations for the angle optimizer.
    #[arg(long)]
    pub budget: Option<usize>,
    /// Measurement shots per sub-solve.
    #[arg(long)]
    pub shots: Option<usize>,
}

#[derive(Args, Debug)]
pub struct GenQuboArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
    /// Output path (default qubo-n<N>-seed<S>.json).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    /// QUBO as JSON, or CSV (size line, then dense rows).
    #[arg(long)]
    pub qubo: PathBuf,
    #[arg(long, value_enum, default_value_t = CliMode::Dqaoa)]
    pub mode: CliMode,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long)]
    pub p: Option<usize>,
    /// Block sizes swept by the dc mode.
    #[arg(long, value_delimiter = ',')]
    pub dc_sizes: Vec<usize>,
    #[command(flatten)]
    pub qaoa: QaoaFlags,
    /// Annealing sweeps (sa mode).
    #[arg(long)]
    pub sweeps: Option<usize>,
    /// Annealing restarts (sa mode).
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Report JSON path.
    #[arg(long, default_value = "report.json")]
    pub out: PathBuf,
    /// Trace CSV path (default: next to the report).
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Comma-separated problem sizes.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["size_range", "from_reports"])]
    pub sizes: Vec<usize>,
    /// Inclusive size range `A..B` or `A..B:STEP`.
    #[arg(long, conflicts_with = "from_reports")]
    pub size_range: Option<String>,
    /// Comma-separated modes among dqaoa, dq-qaoa, dc.
    #[arg(long, value_delimiter = ',')]
    pub modes: Vec<String>,
    /// Instances per size.
    #[arg(long)]
    pub seeds: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long)]
    pub p: Option<usize>,
    #[command(flatten)]
    pub qaoa: QaoaFlags,
    /// Output directory for bench.csv, bench.json and manifest.json.
    #[arg(long, default_value = "bench-out")]
    pub out: PathBuf,
    /// Ratio of two saved solve reports: ALGORITHM REFERENCE.
    #[arg(long, num_args = 2, value_names = ["ALG", "REF"], conflicts_with_all = ["modes", "seeds"])]
    pub from_reports: Vec<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutFormat {
    Json,
    Text,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// Structure bits, two per layer, e.g. 000110111001.
    #[arg(long)]
    pub bits: String,
    /// Directory holding SiO2.csv, Si3N4.csv, Al2O3.csv, TiO2.csv.
    #[arg(long)]
    pub materials: Option<PathBuf>,
    /// Solar spectrum CSV.
    #[arg(long)]
    pub solar: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutFormat::Json)]
    pub out: OutFormat,
}

#[derive(Args, Debug)]
pub struct AlArgs {
    #[arg(long)]
    pub n_bits: Option<usize>,
    #[arg(long)]
    pub materials: Option<PathBuf>,
    #[arg(long)]
    pub solar: Option<PathBuf>,
    /// Override the size-based cycle cap.
    #[arg(long)]
    pub cycles_cap: Option<usize>,
    /// Random structures evaluated before the first cycle.
    #[arg(long)]
    pub init_count: Option<usize>,
    /// Score structures by their number of set bits instead of optics.
    #[arg(long)]
    pub synthetic: bool,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long)]
    pub p: Option<usize>,
    #[command(flatten)]
    pub qaoa: QaoaFlags,
    /// Run directory; an existing checkpoint there is resumed.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct QaoaDebugArgs {
    #[arg(long)]
    pub qubo: PathBuf,
    #[command(flatten)]
    pub qaoa: QaoaFlags,
    /// Fixed cost angles, one per layer; skips optimization (needs --beta).
    #[arg(long, value_delimiter = ',', requires = "beta", allow_negative_numbers = true)]
    pub gamma: Vec<f64>,
    /// Fixed mixer angles, one per layer.
    #[arg(long, value_delimiter = ',', requires = "gamma", allow_negative_numbers = true)]
    pub beta: Vec<f64>,
    /// Most probable basis states to list.
    #[arg(long, default_value_t = 8)]
    pub top: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

impl From<dqopt::Error> for CliError {
    fn from(e: dqopt::Error) -> Self {
        CliError::Core(e)
    }
}
