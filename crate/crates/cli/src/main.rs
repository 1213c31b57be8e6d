//! `gscert`: numerical certification that a smooth function flat at an
//! attracting-side singularity of a vector field must vanish identically.
//!
//! Every subcommand prints one JSON report to standard output and uses the
//! exit code for machine consumption: 0 success (including a definite
//! certificate either way), 2 bad input, 3 numerical failure, 4 an
//! inconclusive certificate.

mod commands;
mod problem;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gscert_core::inequality::RhsMode;
use problem::ProblemArgs;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "gscert",
    version,
    about = "Dynamical certificates for quasi-analytic vanishing",
    arg_required_else_help = true
)]
struct Cli {
    #[command(flatten)]
    common: CommonOpts,

    #[command(subcommand)]
    command: Command,
}

/// Options shared by every subcommand.
#[derive(Args)]
pub struct CommonOpts {
    /// Sampling seed; overrides the seed in the spec or catalog entry
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Half-width of the zero band when judging eigenvalue sign
    #[arg(long, global = true, default_value_t = 1e-9, value_name = "TOL")]
    pub tol_hyperbolic: f64,

    /// Threshold under which decay ratios count as vanishing
    #[arg(long, global = true, default_value_t = 1e-12, value_name = "TOL")]
    pub flat_tol: f64,

    /// Indent width for the JSON report (0 = compact single line)
    #[arg(long, global = true, default_value_t = 0, value_name = "N")]
    pub json_indent: usize,

    /// Directory to fill with plot-ready CSV series
    #[arg(long, global = true, value_name = "DIR")]
    pub emit_plot_data: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the origin of the field and test inner-product positivity
    Analyze(AnalyzeArgs),
    /// Integrate one orbit and report how it terminates
    Flow(FlowArgs),
    /// Run the full vanishing certificate (four hypotheses + witness)
    Certify(CertifyArgs),
    /// Probe whether the function is flat at the origin, order by order
    Flatness(FlatnessArgs),
    /// Check the exponential growth bound along one forward orbit
    Gronwall(GronwallArgs),
    /// List the built-in example problems, or show one in full
    Catalog(CatalogArgs),
}

#[derive(Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum DirectionArg {
    Forward,
    Backward,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Rk45,
    Rk4,
}

#[derive(Args)]
pub struct FlowArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,

    /// Initial point, comma-separated coordinates
    #[arg(long, value_name = "COORDS", allow_hyphen_values = true)]
    pub x0: String,

    /// Flow direction (backward integrates x' = -X(x))
    #[arg(long, value_enum, default_value_t = DirectionArg::Forward)]
    pub direction: DirectionArg,

    /// Integrator (rk45 adaptive, rk4 fixed-step)
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,

    /// Step size for the fixed-step integrator
    #[arg(long, default_value_t = 1e-3, value_name = "H")]
    pub step: f64,

    /// Time budget for the orbit
    #[arg(long = "t", alias = "t-max", value_name = "T")]
    pub t_max: Option<f64>,

    /// Stop when the orbit norm reaches this radius [default: 10x the disc]
    #[arg(long, value_name = "R")]
    pub escape_radius: Option<f64>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum RhsArg {
    /// Bound the derivative by c·|f(x)|
    F,
    /// Bound the derivative by c·|x| (exploratory; supports no conclusion)
    Norm,
}

impl From<RhsArg> for RhsMode {
    fn from(arg: RhsArg) -> Self {
        match arg {
            RhsArg::F => RhsMode::FunctionValue,
            RhsArg::Norm => RhsMode::PointNorm,
        }
    }
}

#[derive(Args)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,

    /// Right-hand side of the derivative inequality
    #[arg(long, value_enum, default_value_t = RhsArg::F)]
    pub rhs: RhsArg,

    /// Highest vanishing order probed by the flatness hypothesis
    #[arg(long, default_value_t = 8, value_name = "K")]
    pub kmax: u32,
}

#[derive(Args)]
pub struct FlatnessArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,

    /// Highest vanishing order to probe
    #[arg(long, default_value_t = 8, value_name = "K")]
    pub kmax: u32,

    /// Probe radii, comma-separated [default: 16 log-spaced in [r/1000, r]]
    #[arg(long, value_name = "RADII")]
    pub radii: Option<String>,
}

#[derive(Args)]
pub struct GronwallArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,

    /// Initial point, comma-separated coordinates
    #[arg(long, value_name = "COORDS", allow_hyphen_values = true)]
    pub x0: String,

    /// Growth constant; estimated from disc samples when absent
    #[arg(long, value_name = "C", allow_negative_numbers = true)]
    pub c: Option<f64>,

    /// Additive tolerance when comparing |f| against the bound
    #[arg(long, default_value_t = 1e-7, value_name = "S")]
    pub slack: f64,

    /// Length of the forward orbit
    #[arg(long = "t-max", alias = "t", default_value_t = 1.0, value_name = "T")]
    pub t_max: f64,

    /// Stop when the orbit norm reaches this radius [default: 10x the disc]
    #[arg(long, value_name = "R")]
    pub escape_radius: Option<f64>,
}

#[derive(Args)]
pub struct CatalogArgs {
    /// Entry to show in full; omit to list all entries
    pub name: Option<String>,
}

fn run(cli: &Cli) -> Result<commands::CommandOutput, problem::Failure> {
    match &cli.command {
        Command::Analyze(args) => commands::analyze(&cli.common, args),
        Command::Flow(args) => commands::flow(&cli.common, args),
        Command::Certify(args) => commands::certify(&cli.common, args),
        Command::Flatness(args) => commands::flatness(&cli.common, args),
        Command::Gronwall(args) => commands::gronwall(&cli.common, args),
        Command::Catalog(args) => commands::catalog_cmd(&cli.common, args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{}", out.json) {
                Ok(()) => ExitCode::from(out.exit),
                // A closed pipe (e.g. `gscert ... | head`) is not a failure.
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::from(out.exit),
                Err(e) => {
                    eprintln!("error: cannot write report: {e}");
                    ExitCode::from(3)
                }
            }
        }
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
