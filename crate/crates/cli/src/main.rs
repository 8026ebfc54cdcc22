//! `ltpmor` command-line front end.
//!
//! Exit codes: 0 success, 1 numerical failure, 2 usage error, 3 I/O error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ltpmor::mor::ReductionMethod;
use ltpmor::{Error, ErrorCategory};

#[derive(Parser, Debug)]
#[command(name = "ltpmor", version, about = "H2 analysis and model reduction of linear time-periodic systems")]
pub struct Cli {
    /// Worker threads for parallel sweeps and block solves.
    #[arg(long, env = "LTPMOR_JOBS", global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Reduce an LTP system (truncate, lift, reduce, unlift) and report errors and the bound.
    Reduce(ReduceArgs),
    /// H2 norm by every applicable path, with pairwise discrepancies.
    H2norm(H2normArgs),
    /// A-posteriori error bound for a given reduced model.
    Bound(BoundArgs),
    /// Backward-Euler simulation to a CSV trace.
    Simulate(SimulateArgs),
    /// Reduction sweep over r on a built-in benchmark.
    Bench(BenchArgs),
    /// Floquet transform of a sampled periodic system into Floquet–Fourier form.
    Floquet(FloquetArgs),
}

#[derive(Args, Debug)]
pub struct ReduceArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Report file; printed to stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Reduced system file; defaults to `<output stem>.reduced.json` next to the report.
    #[arg(long)]
    pub reduced: Option<PathBuf>,
    #[arg(short = 'r', long = "order")]
    pub order: usize,
    /// Fourier truncation order N (defaults to the full expansion).
    #[arg(short = 'N', long = "fourier-trunc")]
    pub fourier_trunc: Option<usize>,
    #[arg(long, default_value = "irka", value_parser = parse_method)]
    pub method: ReductionMethod,
    /// IRKA tolerance on the relative shift movement.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 100)]
    pub max_iter: usize,
    /// Fail instead of returning the best iterate when IRKA does not converge.
    #[arg(long)]
    pub strict: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Fundamental frequency assigned to an LTI input file.
    #[arg(long, default_value_t = 1.0)]
    pub omega0: f64,
    /// POD training input.
    #[arg(long, default_value = "step")]
    pub signal: String,
    #[arg(long, default_value_t = 1.0)]
    pub dt: f64,
    #[arg(long, default_value_t = 100.0)]
    pub tfinal: f64,
}

#[derive(Args, Debug)]
pub struct H2normArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// First embedding order of the Zhou–Hagiwara doubling sequence.
    #[arg(long, default_value_t = 4)]
    pub embed_order: usize,
    /// Last embedding order tried.
    #[arg(long, default_value_t = 64)]
    pub max_embed_order: usize,
    /// Relative change that stops the doubling sequence.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Frequency shells summed by the pole-residue path (defaults to N).
    #[arg(long)]
    pub ell_max: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub omega0: f64,
}

#[derive(Args, Debug)]
pub struct BoundArgs {
    /// Full system.
    #[arg(long)]
    pub input: PathBuf,
    /// Reduced system.
    #[arg(long)]
    pub reduced: PathBuf,
    #[arg(short = 'N', long = "fourier-trunc")]
    pub fourier_trunc: Option<usize>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    pub omega0: f64,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// LTI, LTP or periodic-matrix file.
    #[arg(long)]
    pub input: PathBuf,
    /// Second system whose output is written as `y_ref` with `abs_err`.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// step | sine:<omega> | pulse:<t> | file:<path>
    #[arg(long, default_value = "step")]
    pub signal: String,
    #[arg(long, default_value_t = 1e-2)]
    pub dt: f64,
    #[arg(long, default_value_t = 10.0)]
    pub tfinal: f64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum BenchCaseName {
    Heat,
    Modulated,
    Circuit,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    pub case: BenchCaseName,
    /// Size: interior nodes (heat), states (modulated, even) or ladder sections (circuit).
    #[arg(long)]
    pub n: Option<usize>,
    /// Time samples per period (heat, circuit).
    #[arg(long, default_value_t = 64)]
    pub grid: usize,
    /// Fourier truncation order for the circuit (heat uses grid/2, modulated 2).
    #[arg(short = 'N', long = "fourier-trunc")]
    pub fourier_trunc: Option<usize>,
    #[arg(long, default_value_t = 4)]
    pub rmin: usize,
    #[arg(long)]
    pub rmax: Option<usize>,
    #[arg(long, default_value_t = 2)]
    pub rstep: usize,
    /// Comma-separated list of irka, bt, pod.
    #[arg(long, default_value = "irka,pod")]
    pub methods: String,
    /// 3-input/3-output LTI base for the modulated case.
    #[arg(long)]
    pub base: Option<PathBuf>,
    #[arg(long)]
    pub omega0: Option<f64>,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 100)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct FloquetArgs {
    /// Periodic-matrix file.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(short = 'N', long = "fourier-trunc")]
    pub fourier_trunc: Option<usize>,
    /// Integration steps per period for the fundamental matrix.
    #[arg(long, default_value_t = ltpmor::floquet::DEFAULT_STEPS)]
    pub steps: usize,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn parse_method(s: &str) -> Result<ReductionMethod, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn exit_code(category: ErrorCategory) -> u8 {
    match category {
        ErrorCategory::Numerical => 1,
        ErrorCategory::Usage => 2,
        ErrorCategory::Io => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let category = e.category();
            let report = serde_json::json!({
                "error": {
                    "category": format!("{category:?}").to_lowercase(),
                    "kind": e.kind(),
                    "message": e.to_string(),
                }
            });
            eprintln!("{report}");
            ExitCode::from(exit_code(category))
        }
    }
}
