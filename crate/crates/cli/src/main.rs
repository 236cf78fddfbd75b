//! `hcsdr`: fit Hellinger-correlation directions, run the simulation grid
//! and evaluate directions on a real dataset.

mod commands;
mod config;
mod failure;
mod input;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use failure::Failure;

#[derive(Debug, Parser)]
#[command(name = "hcsdr", version, about = "Single-index dimension reduction by Hellinger correlation")]
pub struct Cli {
    /// Master seed [default: 20240601, or the config file's value]
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads for the simulation grid [default: all cores]
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Directory for output files and the run manifest
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// TOML file overriding the defaults shown by `show-config`
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate a direction on a CSV file
    Fit(FitArgs),
    /// Run the Monte-Carlo grid and report mean (sd) of the subspace distance
    Simulate(SimulateArgs),
    /// Compare test MSE of raw and refined directions on a real dataset
    Real(RealArgs),
    /// Print the effective configuration as TOML
    ShowConfig,
    /// Re-run the command recorded in a manifest
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// CSV file with a header row
    pub data: PathBuf,

    /// Response column [default: last column]
    #[arg(long)]
    pub target: Option<String>,

    /// Columns to ignore, comma separated
    #[arg(long, value_delimiter = ',')]
    pub drop: Vec<String>,

    /// Starting direction: sir, save, dr, random or file:<path>
    #[arg(long, default_value = "sir")]
    pub init: String,

    /// Independent annealing runs; the best is kept [default: 1]
    #[arg(long)]
    pub restarts: Option<usize>,

    /// Slices for sir, save and dr [default: 10 when n >= 100, else max(2, n/20)]
    #[arg(long)]
    pub slices: Option<usize>,

    /// Add seeded uniform noise of this many column standard deviations to
    /// break ties
    #[arg(long, value_name = "SCALE")]
    pub jitter: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// 10 replications per cell
    #[arg(long)]
    pub quick: bool,

    /// Models, comma separated [default: I,II,III]
    #[arg(long, value_delimiter = ',')]
    pub models: Vec<hcsdr::sim::Model>,

    /// Initializers, comma separated [default: sir,save,dr]
    #[arg(long, value_delimiter = ',')]
    pub inits: Vec<hcsdr::InitTag>,

    /// Sample sizes, comma separated [default: 100,200,400]
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,

    /// Replications per cell [default: 100]
    #[arg(long)]
    pub reps: Option<usize>,

    /// Predictor designs: normal, nonnormal [default: normal]
    #[arg(long, value_delimiter = ',')]
    pub predictors: Vec<hcsdr::sim::Predictors>,

    /// Coefficient vector: sparse or nonsparse [default: sparse]
    #[arg(long)]
    pub eta: Option<hcsdr::sim::EtaKind>,

    /// Read Exp(k) in the non-normal design as mean k instead of rate k
    #[arg(long)]
    pub exp_mean: bool,
}

#[derive(Debug, Args)]
pub struct RealArgs {
    /// CSV file with a header row
    pub data: PathBuf,

    /// Response column (required here or in the config file)
    #[arg(long)]
    pub target: Option<String>,

    /// Columns to ignore, comma separated
    #[arg(long, value_delimiter = ',')]
    pub drop: Vec<String>,

    /// Training observations; the rest form the test set [default: 300]
    #[arg(long)]
    pub train_size: Option<usize>,

    /// Initializers, comma separated [default: sir,save,dr]
    #[arg(long, value_delimiter = ',')]
    pub inits: Vec<hcsdr::InitTag>,

    /// Fraction of the training set in each local quadratic fit [default: 0.75]
    #[arg(long)]
    pub span: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    /// A manifest.json written by an earlier run
    pub manifest: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(cli, argv[1..].to_vec(), None) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => report(f),
    }
}

fn report(f: Failure) -> ExitCode {
    eprintln!("error: {f}");
    ExitCode::from(f.code())
}
