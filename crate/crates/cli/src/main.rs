//! Command-line front end for the capacity-bound library.
//!
//! Subcommands map one-to-one onto the library: `bounds` (one parameter
//! point), `sweep` (CSV over an axis), `tanaka` (fixed-point report),
//! `spectrum` (Marchenko–Pastur validation), `oracle` (finite-size
//! Monte-Carlo cross-check) and `figures` (preset sweep bundles).
//!
//! Exit codes: 0 success, 1 usage error, 2 computation failure, 3 partial
//! output. All output is deterministic for fixed flags and seeds,
//! independent of `--jobs`.

mod report;
mod sweep;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use nearfar_core::bounds::{ebn0_db_to_sigma, pcf_db_to_rho, OptimizerConfig, SystemParams};

pub const DEFAULT_SEED: u64 = 1;

#[derive(Parser)]
#[command(
    name = "nearfar",
    about = "Sum-capacity bounds for binary CDMA under near-far power fluctuation",
    version
)]
struct Cli {
    /// Worker threads for parallel evaluation (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every bound at one parameter point.
    Bounds(BoundsArgs),
    /// Sweep one axis and write a CSV file.
    Sweep(sweep::SweepArgs),
    /// Solve the replica fixed point and report every solution.
    Tanaka(TanakaArgs),
    /// Compare sampled Gram spectra against the Marchenko-Pastur law.
    Spectrum(SpectrumArgs),
    /// Monte-Carlo mutual information at small sizes, with the bound sandwich.
    Oracle(OracleArgs),
    /// Emit the preset sweep bundle behind one of the five figures.
    Figures(sweep::FiguresArgs),
}

/// Noise level: exactly one of --sigma / --ebn0-db.
#[derive(Args, Clone)]
pub struct NoiseArg {
    /// Per-chip noise standard deviation.
    #[arg(long, conflicts_with = "ebn0_db")]
    sigma: Option<f64>,
    /// E_b/N_0 in dB (sigma = sqrt(10^(-x/10)/2)).
    #[arg(long = "ebn0-db", allow_negative_numbers = true)]
    ebn0_db: Option<f64>,
}

impl NoiseArg {
    pub fn resolve(&self) -> Result<f64, String> {
        match (self.sigma, self.ebn0_db) {
            (Some(s), None) => Ok(s),
            (None, Some(db)) => Ok(ebn0_db_to_sigma(db)),
            _ => Err("exactly one of --sigma / --ebn0-db is required".into()),
        }
    }

    pub fn is_given(&self) -> bool {
        self.sigma.is_some() || self.ebn0_db.is_some()
    }
}

/// Near-far level: exactly one of --rho / --pcf-db.
#[derive(Args, Clone)]
pub struct NearFarArg {
    /// Near-far standard deviation.
    #[arg(long, conflicts_with = "pcf_db")]
    rho: Option<f64>,
    /// Power control factor in dB (rho = 10^(-x/20)).
    #[arg(long = "pcf-db", allow_negative_numbers = true)]
    pcf_db: Option<f64>,
}

impl NearFarArg {
    pub fn resolve(&self) -> Result<f64, String> {
        match (self.rho, self.pcf_db) {
            (Some(r), None) => Ok(r),
            (None, Some(db)) => Ok(pcf_db_to_rho(db)),
            _ => Err("exactly one of --rho / --pcf-db is required".into()),
        }
    }

    pub fn resolve_optional(&self) -> Result<Option<f64>, String> {
        match (self.rho, self.pcf_db) {
            (None, None) => Ok(None),
            _ => self.resolve().map(Some),
        }
    }

    pub fn is_given(&self) -> bool {
        self.rho.is_some() || self.pcf_db.is_some()
    }
}

#[derive(Args)]
struct BoundsArgs {
    /// Load ratio n/m.
    #[arg(long)]
    beta: f64,
    #[command(flatten)]
    noise: NoiseArg,
    #[command(flatten)]
    nearfar: NearFarArg,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct TanakaArgs {
    /// Load ratio n/m.
    #[arg(long)]
    beta: f64,
    #[command(flatten)]
    noise: NoiseArg,
    #[command(flatten)]
    nearfar: NearFarArg,
    /// Scan grid of the fixed-point search.
    #[arg(long, default_value_t = nearfar_core::tanaka::DEFAULT_GRID)]
    grid: usize,
}

#[derive(Args)]
struct SpectrumArgs {
    /// Chip count (rows).
    #[arg(long)]
    m: usize,
    /// User count (columns).
    #[arg(long)]
    n: usize,
    /// Base seed; trial t uses seed + t. Falls back to NEARFAR_DEFAULT_SEED.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 1)]
    trials: usize,
}

#[derive(Args)]
struct OracleArgs {
    /// Chip count (rows).
    #[arg(long)]
    m: usize,
    /// User count (columns); capped at 20 by exact enumeration.
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    noise: NoiseArg,
    #[command(flatten)]
    nearfar: NearFarArg,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    /// Signature seed. Falls back to NEARFAR_DEFAULT_SEED.
    #[arg(long)]
    seed: Option<u64>,
    /// Use the orthogonal Sylvester matrix instead of a random one
    /// (requires m = n = power of two).
    #[arg(long)]
    orthogonal: bool,
}

/// Anything that stops a run: a usage problem (exit 1) or a computation
/// failure (exit 2).
pub enum Failure {
    Usage(String),
    Computation(String),
}

impl From<nearfar_core::Error> for Failure {
    fn from(e: nearfar_core::Error) -> Self {
        Failure::Computation(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Computation(format!("i/o error: {e}"))
    }
}

pub enum Outcome {
    Full,
    Partial,
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };

    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be at least 1");
            return 1;
        }
        // Ignore the error when a global pool already exists (tests).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }

    let result = match cli.command {
        Command::Bounds(args) => cmd_bounds(args),
        Command::Sweep(args) => sweep::cmd_sweep(args),
        Command::Tanaka(args) => cmd_tanaka(args),
        Command::Spectrum(args) => cmd_spectrum(args),
        Command::Oracle(args) => cmd_oracle(args),
        Command::Figures(args) => sweep::cmd_figures(args),
    };
    match result {
        Ok(Outcome::Full) => 0,
        Ok(Outcome::Partial) => 3,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(Failure::Computation(msg)) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

/// Seed resolution: flag, then NEARFAR_DEFAULT_SEED, then a fixed default.
pub fn resolve_seed(flag: Option<u64>) -> Result<u64, Failure> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var("NEARFAR_DEFAULT_SEED") {
        Ok(text) => text.trim().parse::<u64>().map_err(|_| {
            Failure::Usage(format!("NEARFAR_DEFAULT_SEED is not a valid u64: {text:?}"))
        }),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn cmd_bounds(args: BoundsArgs) -> Result<Outcome, Failure> {
    let sigma = args.noise.resolve().map_err(Failure::Usage)?;
    let rho = args.nearfar.resolve().map_err(Failure::Usage)?;
    let params = SystemParams::new(args.beta, sigma, rho)?;
    let set = nearfar_core::bounds::capacity_bounds(&params, &OptimizerConfig::default())?;
    match args.format {
        Format::Json => print!("{}", report::bounds_json(&params, &set)),
        Format::Csv => print!("{}", report::bounds_csv(&params, &set)),
    }
    Ok(Outcome::Full)
}

fn cmd_tanaka(args: TanakaArgs) -> Result<Outcome, Failure> {
    let sigma = args.noise.resolve().map_err(Failure::Usage)?;
    let rho = args.nearfar.resolve_optional().map_err(Failure::Usage)?;
    let variance = match rho {
        Some(r) if r > 0.0 => {
            let params = SystemParams::new(args.beta, sigma, r)?;
            if args.beta <= 1.0 {
                return Err(Failure::Computation(format!(
                    "the near-far substitution needs beta > 1, got {}",
                    args.beta
                )));
            }
            nearfar_core::bounds::omega_squared(&params)
        }
        // rho = 0 and no rho at all both solve at sigma^2
        _ => sigma * sigma,
    };
    if args.beta <= 0.0 {
        return Err(Failure::Usage(format!("--beta must be > 0, got {}", args.beta)));
    }
    let solutions = nearfar_core::tanaka::find_fixed_points(args.beta, variance, args.grid)?;
    print!(
        "{}",
        report::tanaka_json(args.beta, sigma, rho, variance, args.grid, &solutions)
    );
    Ok(Outcome::Full)
}

fn cmd_spectrum(args: SpectrumArgs) -> Result<Outcome, Failure> {
    if args.m < 2 || args.n < 2 {
        return Err(Failure::Usage(format!(
            "spectrum needs m, n >= 2, got {} x {}",
            args.m, args.n
        )));
    }
    if args.trials == 0 {
        return Err(Failure::Usage("--trials must be at least 1".into()));
    }
    let seed = resolve_seed(args.seed)?;
    let text = report::spectrum_json(args.m, args.n, seed, args.trials)?;
    print!("{text}");
    Ok(Outcome::Full)
}

fn cmd_oracle(args: OracleArgs) -> Result<Outcome, Failure> {
    let sigma = args.noise.resolve().map_err(Failure::Usage)?;
    let rho = args.nearfar.resolve().map_err(Failure::Usage)?;
    if args.m == 0 || args.n == 0 {
        return Err(Failure::Usage("oracle needs m, n >= 1".into()));
    }
    let seed = resolve_seed(args.seed)?;
    let matrix = if args.orthogonal {
        if args.m != args.n || !args.m.is_power_of_two() {
            return Err(Failure::Usage(format!(
                "--orthogonal needs m = n = power of two, got {} x {}",
                args.m, args.n
            )));
        }
        nearfar_core::spectral::SignatureMatrix::sylvester(args.m.trailing_zeros())?
    } else {
        nearfar_core::spectral::SignatureMatrix::sample(args.m, args.n, seed)?
    };
    let text = report::oracle_json(&matrix, sigma, rho, args.samples, seed, args.orthogonal)?;
    print!("{text}");
    Ok(Outcome::Full)
}
