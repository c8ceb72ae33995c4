use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "sldkit",
    version,
    about = "Symmetric logarithmic derivatives and quantum Fisher information"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for the SLD at one or more parameter points.
    Sld(SldArgs),
    /// Quantum Fisher information (scalar per parameter, or the full matrix).
    Qfi(QfiArgs),
    /// Run every applicable route and compare them pairwise.
    Xval(XvalArgs),
    /// Monte-Carlo maximum-likelihood run against the Cramér–Rao bound.
    Crb(CrbArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodChoice {
    /// Closed form when the state is in the quadratic class, spectral otherwise.
    Auto,
    Spectral,
    Sylvester,
    Quadrature,
    Series,
    #[value(name = "closed_form", alias = "closed-form")]
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    /// One compact JSON object per line.
    Json,
    /// Indented JSON objects.
    Pretty,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Model file (JSON).
    #[arg(long)]
    pub model: PathBuf,

    /// Parameter value, `name=value`; repeat for several parameters.
    #[arg(long = "at", value_name = "NAME=VALUE")]
    pub at: Vec<String>,

    /// Evenly spaced grid `name=lo:hi:steps`, endpoints included.
    #[arg(long, value_name = "NAME=LO:HI:STEPS")]
    pub sweep: Option<String>,

    /// Restrict output to one parameter (default: every model parameter).
    #[arg(long, value_name = "NAME")]
    pub param: Option<String>,

    /// Solver absolute tolerance.
    #[arg(long, default_value_t = sldkit_core::sld::DEFAULT_ABS_TOL)]
    pub tol: f64,

    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub output: OutputFormat,

    /// Shift added to the closed-form coefficient derivatives. Used to
    /// exercise the cross-validation failure path.
    #[arg(long, hide = true, default_value_t = 0.0, allow_negative_numbers = true)]
    pub perturb_closed_form: f64,
}

#[derive(Debug, Clone, Args)]
pub struct SldArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    #[arg(long, value_enum, default_value_t = MethodChoice::Auto)]
    pub method: MethodChoice,
}

#[derive(Debug, Clone, Args)]
pub struct QfiArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    #[arg(long, value_enum, default_value_t = MethodChoice::Auto)]
    pub method: MethodChoice,

    /// Emit the QFI matrix over all parameters instead of scalars.
    #[arg(long)]
    pub matrix: bool,
}

#[derive(Debug, Clone, Args)]
pub struct XvalArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CrbArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    #[arg(long, default_value_t = 10_000)]
    pub shots: usize,

    #[arg(long, default_value_t = 200)]
    pub trials: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}
