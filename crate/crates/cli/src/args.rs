use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cw11_core::QueryOrder;

#[derive(Debug, Parser)]
#[command(name = "cw11", version, about = "Convex C^{1,1} extension of 1-jets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the (CW11) condition and report the minimal constant.
    Validate(ValidateArgs),
    /// Extend a jet to new points.
    Extend(ExtendArgs),
    /// Check the outer-normal conditions of a convex-body data set.
    BodyCheck(BodyArgs),
    /// Evaluate the infinite-dimensional counterexample at finite truncation.
    Cex {
        #[command(subcommand)]
        which: CexCommand,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Order {
    Given,
    Canonical,
}

impl From<Order> for QueryOrder {
    fn from(o: Order) -> Self {
        match o {
            Order::Given => QueryOrder::Given,
            Order::Canonical => QueryOrder::Canonical,
        }
    }
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub jet: PathBuf,
    /// Constant to test; without it only the minimal constant is reported.
    #[arg(long = "M")]
    pub m: Option<f64>,
    /// Admissible negative gap at `--M`, relative to `1 + value scale`.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Also write the report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExtendArgs {
    #[arg(long)]
    pub jet: PathBuf,
    #[arg(long, conflicts_with = "grid", required_unless_present = "grid")]
    pub queries: Option<PathBuf>,
    /// Uniform grid with N nodes per axis on [LO, HI]^d (d <= 2).
    #[arg(long, num_args = 3, value_names = ["LO", "HI", "N"], allow_negative_numbers = true)]
    pub grid: Option<Vec<String>>,
    #[arg(long = "M")]
    pub m: Option<f64>,
    /// Position of each new value inside its bracket [s, I].
    #[arg(long, default_value_t = 0.5)]
    pub theta: f64,
    #[arg(long, value_enum, default_value_t = Order::Given)]
    pub order: Order,
    /// Admissible negative gap of the output jet, relative to `1 + value scale`.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Augmented jet (json) or query rows (csv).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Defaults to csv in grid mode and json otherwise.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct BodyArgs {
    #[arg(long)]
    pub body: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum CexCommand {
    /// Tangent plane at e~_k evaluated at r e_1.
    Tangent(TangentArgs),
    /// Maximum of f over uniform samples of the unit ball.
    Scan(ScanArgs),
    /// Tangent values for several k.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct TangentArgs {
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub r: f64,
    /// Series truncation K (also the dimension); defaults to 2k + 20.
    #[arg(long)]
    pub terms: Option<usize>,
    /// Relative agreement required between the two evaluation paths.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long, default_value_t = 50)]
    pub dim: usize,
    /// Defaults to the dimension.
    #[arg(long)]
    pub terms: Option<usize>,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub r: f64,
    #[arg(long, value_delimiter = ',', required = true)]
    pub ks: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    pub terms: usize,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}
