//! Command-line front end of the compound-frequency verifier.
//!
//! Every subcommand wraps one library entry point, and the process exit code
//! encodes the verdict so scripted callers need not parse any output:
//!
//! | code | meaning                                      |
//! |------|----------------------------------------------|
//! | 0    | inequality satisfied on the whole grid       |
//! | 1    | inequality violated at some swept frequency  |
//! | 2    | spectral precondition failed, nothing swept  |
//! | 3    | usage or configuration error                 |
//! | 4    | a numerical procedure failed                 |

mod artifacts;
mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use compound_freq_core::ErrorKind;

#[derive(Parser)]
#[command(
    name = "compound-freq",
    version,
    about = "Frequency-domain certificates of compound exponential stability \
             for scalar delay systems"
)]
struct Cli {
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, env = "COMPOUND_FREQ_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Locate the rightmost characteristic roots and the compound spectral bound
    Roots(RootsArgs),
    /// Run the frequency sweep and write its artifacts
    Sweep(SweepArgs),
    /// Run the sweep and print a detailed account of the certificate
    Verify(SweepArgs),
    /// One verdict per point of a model parameter grid
    Scan(ScanArgs),
    /// Rerun the sweep across mode cutoffs and horizons and tabulate the gaps
    Convergence(ConvergenceArgs),
    /// Delayed-oscillator case study at its published operating point
    DemoSs(DemoArgs),
    /// Feedback-model case study at both published delays
    DemoMg(DemoArgs),
}

/// Which system to verify. Absent flags fall back to the config file, then to
/// the published case-study values.
#[derive(Args, Clone)]
struct ModelArgs {
    /// Case-study model the system is built from
    #[arg(long, value_enum)]
    model: Option<config::ModelKind>,
    /// Delayed-oscillator coupling, in (0, 1)
    #[arg(long)]
    alpha: Option<f64>,
    /// Delay, in model time units
    #[arg(long)]
    tau: Option<f64>,
    /// Absorbing-ball radius; "auto" solves the dissipativity equation
    #[arg(long, value_parser = config::parse_radius)]
    radius: Option<config::RadiusArg>,
    /// Feedback-model decay rate
    #[arg(long)]
    gamma: Option<f64>,
    /// Feedback-model production gain
    #[arg(long)]
    beta: Option<f64>,
    /// Feedback-model nonlinearity exponent
    #[arg(long)]
    kappa: Option<f64>,
    /// Override the perturbation bound Lambda (the verdict compares the sweep
    /// peak against 1/Lambda)
    #[arg(long)]
    lambda: Option<f64>,
}

/// Discretization of the approximation scheme.
#[derive(Args, Clone)]
struct SchemeArgs {
    /// Compound order
    #[arg(long)]
    m: Option<usize>,
    /// Fourier cutoff: modes -N..=N enter the truncation
    #[arg(long = "N")]
    n_modes: Option<usize>,
    /// Integration horizon
    #[arg(long = "T")]
    t_end: Option<f64>,
    /// Swept band is [-Omega, Omega]
    #[arg(long = "Omega")]
    omega_max: Option<f64>,
    /// Frequency grid spacing
    #[arg(long)]
    omega_step: Option<f64>,
    /// Exponential weight: matrices are evaluated on the line Re p = -nu0
    #[arg(long)]
    nu0: Option<f64>,
    /// Target time step (snapped so that it divides the delay exactly)
    #[arg(long)]
    step_hint: Option<f64>,
    /// Angle-grid stride of the direct route
    #[arg(long)]
    theta_stride: Option<usize>,
    /// Evaluation route
    #[arg(long, value_enum)]
    path: Option<config::PathKind>,
    /// Compute negative frequencies explicitly instead of mirroring
    #[arg(long)]
    no_mirror: bool,
    /// Permit experimental compound orders m > 2 (direct route only)
    #[arg(long)]
    experimental_m: bool,
}

/// Where results go.
#[derive(Args, Clone)]
struct OutputArgs {
    /// Directory for sweep.csv, report.json and config.toml
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Also write every computed solution table under <out-dir>/solutions/
    #[arg(long, requires = "out_dir")]
    dump_solutions: bool,
    /// Report stage progress on stderr
    #[arg(long)]
    progress: bool,
}

#[derive(Args, Clone)]
struct SweepArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    scheme: SchemeArgs,
    /// TOML file with the same keys as the echoed config.toml; flags win
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Clone)]
struct RootsArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// TOML file with the same keys as the echoed config.toml; flags win
    #[arg(long)]
    config: Option<PathBuf>,
    /// How many rightmost roots to locate
    #[arg(long, default_value_t = 4)]
    count: usize,
    /// Compound order the spectral bound is reported for
    #[arg(long, default_value_t = 2)]
    m: usize,
    /// Weight the spectral precondition is checked at
    #[arg(long, default_value_t = 0.01)]
    nu0: f64,
}

#[derive(Args, Clone)]
struct ScanArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    scheme: SchemeArgs,
    /// TOML file with the same keys as the echoed config.toml; flags win
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
    /// Comma-separated grid of coupling values (delayed oscillator only)
    #[arg(long, value_delimiter = ',')]
    alphas: Vec<f64>,
    /// Comma-separated grid of delays
    #[arg(long, value_delimiter = ',')]
    taus: Vec<f64>,
}

#[derive(Args, Clone)]
struct ConvergenceArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    scheme: SchemeArgs,
    /// TOML file with the same keys as the echoed config.toml; flags win
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
    /// Ascending mode cutoffs; only the largest is computed, the rest are
    /// extracted as sub-blocks
    #[arg(long, value_delimiter = ',', required = true)]
    mode_cutoffs: Vec<usize>,
    /// Ascending horizons, one full pass each
    #[arg(long, value_delimiter = ',', required = true)]
    horizons: Vec<f64>,
}

#[derive(Args, Clone)]
struct DemoArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    #[command(flatten)]
    output: OutputArgs,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version land here too; keep their conventional
            // success code and route real parse errors to exit 3.
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if n > 0
            && rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .is_err()
        {
            eprintln!("warning: thread pool already initialized; --threads ignored");
        }
    }
    match run::dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.kind() {
                ErrorKind::Usage => 3,
                ErrorKind::Numeric => 4,
            })
        }
    }
}
