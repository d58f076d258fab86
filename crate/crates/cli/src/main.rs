//! `ep4` — blow-up analysis of radial cold-plasma flows in four space
//! dimensions: classification, trajectory simulation, profile evaluation,
//! parameter-plane scans, figure grids, and a self-verification suite.

mod commands;
mod config;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

/// Blow-up analysis of radially symmetric repulsive Euler-Poisson flows in
/// four space dimensions.
///
/// Initial data are entered as the phase-space quadruple `F0,G0,u0,v0`: the
/// scaled radial fields `F0 = V0/r`, `G0 = E0/r` and their scaled slopes
/// `u0 = r·F0' = div V0 − 4·F0`, `v0 = r·G0' = div E0 − 4·G0` at the root
/// radius. Admissible data have `G0 < 1/4` and positive initial density
/// `n0 = 1 − v0 − 4·G0 > 0`.
///
/// Exit status: 0 success, 1 invalid input, 2 verification failure.
#[derive(Debug, Parser)]
#[command(name = "ep4", version, max_term_width = 100)]
struct Cli {
    /// Optional key=value file (one pair per line, `#` comments) supplying
    /// any long option of the chosen subcommand under the same name, e.g.
    /// `datum=0,0,0,0.6`; values given on the command line win
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify one characteristic as smooth, blow-up, or marginal
    Classify(ClassifyArgs),
    /// Integrate one characteristic and write the sampled trajectory
    Simulate(SimulateArgs),
    /// Validate a radial profile and classify the characteristic rooted at
    /// every grid radius
    Profile(ProfileArgs),
    /// Classify every cell of a two-parameter plane
    Scan(ScanArgs),
    /// Write one of the built-in phase-plane grids
    Figure(FigureArgs),
    /// Run the self-verification suite and report its findings
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct ClassifyArgs {
    /// Initial datum `F0,G0,u0,v0`, optionally with a fifth component `r0`
    /// (root radius, default 1; it scales the trajectory but never changes
    /// the verdict)
    #[arg(long, value_name = "F0,G0,u0,v0[,r0]", allow_hyphen_values = true)]
    datum: Option<String>,

    /// Classifier: the closed-form criterion, the integration oracle, or
    /// both side by side [default: closed]
    #[arg(long, value_enum, value_name = "NAME")]
    method: Option<MethodArg>,

    /// Half-width of the marginal band around q* = 0 inside which the
    /// verdict is reported as marginal [default: 1e-6]
    #[arg(long, value_name = "EPS", allow_negative_numbers = true)]
    margin: Option<f64>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Initial datum `F0,G0,u0,v0`, optionally with a fifth component `r0`
    #[arg(long, value_name = "F0,G0,u0,v0[,r0]", allow_hyphen_values = true)]
    datum: Option<String>,

    /// Root radius of the characteristic; mutually exclusive with a
    /// five-component `--datum` [default: 1]
    #[arg(long, value_name = "R", allow_negative_numbers = true)]
    r0: Option<f64>,

    /// Integration horizon in time units [default: 6.283185307179586, one
    /// oscillation period]
    #[arg(long, value_name = "T", allow_negative_numbers = true)]
    horizon: Option<f64>,

    /// Absolute and relative integration tolerances [default: 1e-10,1e-10]
    #[arg(long, value_name = "ABS,REL")]
    tol: Option<String>,

    /// Trajectory CSV path; run metadata (outcome, q zeros, period marks,
    /// step counts) goes to the same path with extension `meta.json`
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ProfileArgs {
    /// Gaussian field pulse of amplitude A: `V0 ≡ 0`, `E0 = A·r·e^(−r²/2)`;
    /// admissible at every radius exactly when 0 < A < 1/4
    #[arg(long, value_name = "A", allow_negative_numbers = true)]
    gaussian: Option<f64>,

    /// CSV table `r,V0,E0` (header required, radii strictly increasing);
    /// evaluated at its own sample radii by finite differences
    #[arg(long, value_name = "FILE")]
    table: Option<PathBuf>,

    /// Largest radius of the uniform grid used with --gaussian
    /// [default: 6]
    #[arg(long, value_name = "X", allow_negative_numbers = true)]
    r_max: Option<f64>,

    /// Grid spacing used with --gaussian [default: 0.05]
    #[arg(long, value_name = "H", allow_negative_numbers = true)]
    r_step: Option<f64>,

    /// Output CSV path: one row `r0,F0,G0,u0,v0,n0,q_star,verdict,t_star`
    /// per grid radius
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ScanArgs {
    /// Parameter plane: `zero-velocity` fixes V0 ≡ 0 and scans
    /// (G0, div E0); `zero-field` fixes E0 ≡ 0 and scans (F0, div V0)
    #[arg(long, value_enum, value_name = "NAME")]
    plane: Option<PlaneArg>,

    /// Horizontal axis as `LO:HI:N` (N grid points, endpoints included)
    #[arg(long, value_name = "LO:HI:N", allow_hyphen_values = true)]
    x: Option<String>,

    /// Vertical axis as `LO:HI:N`
    #[arg(long, value_name = "LO:HI:N", allow_hyphen_values = true)]
    y: Option<String>,

    /// Classifier per cell; `both` also counts disagreements
    /// [default: closed]
    #[arg(long, value_enum, value_name = "NAME")]
    method: Option<MethodArg>,

    /// Grid CSV path; a summary (counts, worst cell, frontier fit) goes to
    /// the same path with extension `summary.json`
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FigureArgs {
    /// `fig1-left`: zero-velocity plane, G0 in [-1, 0.24] by div E0 in
    /// [-2, 2], 200x200 cells, oracle method. `fig1-right`: zero-field
    /// plane, F0 in [-2, 2] by div V0 in [-2, 2], 200x200 cells, oracle
    /// method
    #[arg(long, value_enum, value_name = "NAME")]
    which: Option<WhichArg>,

    /// Grid CSV path; summary sidecar as for `scan`
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Seed of the sampled-data checks [default: 42]
    #[arg(long, value_name = "S")]
    seed: Option<u64>,

    /// Number of sampled data per check [default: 1000]
    #[arg(long, value_name = "N")]
    cases: Option<usize>,

    /// Also write the full report (checks plus comparison ledger) as JSON
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    /// Closed-form criterion algebra
    Closed,
    /// Direct adaptive integration with event location
    Oracle,
    /// Run both and compare
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PlaneArg {
    ZeroVelocity,
    ZeroField,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum WhichArg {
    Fig1Left,
    Fig1Right,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match commands::run(cli) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}
