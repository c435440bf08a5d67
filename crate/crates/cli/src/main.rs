mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Sparse recovery with the error-function penalty.
#[derive(Parser, Debug)]
#[command(name = "erf-sparse", version, about)]
struct Cli {
    /// Random seed. Defaults to $ERF_SPARSE_SEED, then to the command's own default.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one recovery problem from matrix and measurement files.
    Solve(SolveArgs),
    /// Generate a problem instance (A.txt, b.txt, x.txt).
    Gen(GenArgs),
    /// Tabulate a proximal operator on a grid of inputs.
    ProxTable(ProxTableArgs),
    /// ERF success rate over an (F, sigma, sparsity) grid on over-sampled DCT problems.
    BenchSigma(BenchArgs),
    /// Success rates of every method on over-sampled DCT problems.
    BenchSuccess(BenchArgs),
    /// Success rates on separated spikes from low-pass Fourier data.
    BenchSuperres(BenchArgs),
    /// Squared error of unconstrained recovery from noisy Gaussian measurements.
    BenchNoisy(BenchArgs),
    /// Search a matrix kernel for a violation of the ERF null space property.
    GnspCheck(GnspArgs),
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Matrix file in the columnar text format.
    matrix: PathBuf,
    /// Measurement vector file.
    measurements: PathBuf,
    /// l1, erf, logsum, lp-irl1, tl1 or l1-l2.
    #[arg(long)]
    method: String,
    /// Solve `min J(x) s.t. Ax = b` instead of the penalized least squares model.
    #[arg(long)]
    constrained: bool,
    /// ERF sigma (shortcut for `--param sigma=...`).
    #[arg(long)]
    sigma: Option<f64>,
    /// Penalty parameter, e.g. `epsilon=0.1`, `p=0.5`, `a=1`.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
    /// Data-fit weight of the unconstrained model.
    #[arg(long)]
    lambda: Option<f64>,
    /// Flat `key = value` file with solver settings.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Solver setting override, e.g. `max_outer=30`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Write the solution here instead of standard output.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Write the run report here. Without it the report goes to standard
    /// output when `--out` is given.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum GenKind {
    Dct,
    Superres,
    Noisy,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: GenKind,
    /// Measurements (dct, noisy).
    #[arg(long, default_value_t = 64)]
    m: usize,
    /// Signal length (dct, noisy).
    #[arg(long, default_value_t = 1024)]
    n: usize,
    /// DCT coherence parameter F.
    #[arg(long, default_value_t = 1.0)]
    f: f64,
    /// Nonzeros (dct, noisy).
    #[arg(long, default_value_t = 5)]
    s: usize,
    /// Grid size (superres).
    #[arg(long, default_value_t = 1000)]
    n_grid: usize,
    /// Cutoff frequency (superres).
    #[arg(long, default_value_t = 40)]
    fc: usize,
    /// Minimum separation (superres).
    #[arg(long, default_value_t = 20.0)]
    ms: f64,
    /// Noise level (noisy).
    #[arg(long, default_value_t = 0.1)]
    sigma_noise: f64,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args, Debug)]
struct ProxTableArgs {
    /// l1, l0, erf or tl1.
    #[arg(long)]
    method: String,
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    /// ERF sigma (shortcut for `--param sigma=...`).
    #[arg(long)]
    sigma: Option<f64>,
    /// Penalty parameter, e.g. `a=0.1`.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
    #[arg(long, default_value_t = -3.0, allow_negative_numbers = true)]
    vmin: f64,
    #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
    vmax: f64,
    #[arg(long, default_value_t = 601)]
    points: usize,
    /// CSV destination; standard output when absent.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Flat `key = value` file; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Setting override, e.g. `sparsity=2:4:30` or `erf.sigma=0.3`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    #[arg(long)]
    trials: Option<usize>,
    /// Concurrent trials.
    #[arg(long)]
    jobs: Option<usize>,
    /// Comma-separated method labels.
    #[arg(long)]
    methods: Option<String>,
    /// DCT coherence list.
    #[arg(long = "F", alias = "f")]
    f: Option<String>,
    /// ERF sigma list.
    #[arg(long)]
    sigma: Option<String>,
    /// Sparsity list or `start:step:end`.
    #[arg(long)]
    sparsity: Option<String>,
    /// Measurement counts (noisy).
    #[arg(long)]
    m: Option<String>,
    /// Cutoff frequencies (superres).
    #[arg(long)]
    fc: Option<String>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Also write every per-trial record to trials.csv.
    #[arg(long)]
    trials_csv: bool,
}

#[derive(Args, Debug)]
struct GnspArgs {
    /// Matrix file in the columnar text format.
    matrix: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Largest support size checked.
    #[arg(long, default_value_t = 1)]
    s: usize,
    /// Random kernel directions on top of the basis vectors.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
}

/// Outcome of a successful command.
pub enum Status {
    Ok,
    NotConverged,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::NotConverged) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {}", e.replace('\n', " "));
            ExitCode::from(1)
        }
    }
}
