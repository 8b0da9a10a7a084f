use std::path::PathBuf;

use cfcoef::frequency::{Event, Method};
use cfcoef::{BoundKind, Direction, Rational};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug, Clone, Serialize)]
#[command(
    name = "cfcoef",
    version,
    about = "Continued-fraction approximation coefficients: expansions, sharp bounds, frequencies and checks",
    args_override_self = true
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct GlobalOpts {
    /// Output format [default: json, or csv for `bound --table`]
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of stdout
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// File of `key = value` lines supplying default flags
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Leave the timestamp out of JSON output
    #[arg(long, global = true)]
    pub no_timestamp: bool,
    /// Significant digits of floating values in CSV output (round half to even)
    #[arg(long, global = true, default_value_t = 6, value_parser = clap::value_parser!(u32).range(1..=17))]
    pub precision: u32,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    /// Digits, convergents and coefficients of a rational
    Expand(ExpandArgs),
    /// Sharp bounds on D_{n-1} or C_{n-1}, one rectangle or a grid
    Bound(BoundArgs),
    /// Asymptotic frequencies of the bound events and the limiting distribution
    Freq(FreqArgs),
    /// Soundness sweep over random orbits, the C-bound counterexample, or a sharpness witness
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ExpandArgs {
    /// `p/q`, an integer or a decimal string (read exactly)
    #[arg(long, allow_hyphen_values = true)]
    pub x: Rational,
    /// Last index to tabulate [default: all digits]
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct BoundArgs {
    #[arg(long, default_value = "upper_d")]
    pub kind: BoundKind,
    #[arg(long)]
    pub a: Option<u64>,
    #[arg(long)]
    pub b: Option<u64>,
    /// Threshold on D_{n-2}
    #[arg(long)]
    pub r: Option<f64>,
    /// Threshold on D_n
    #[arg(long = "R")]
    #[serde(rename = "R")]
    pub big_r: Option<f64>,
    /// Threshold on C_{n-2} (C-bounds)
    #[arg(long)]
    pub t: Option<f64>,
    /// Threshold on C_n (C-bounds)
    #[arg(long = "T")]
    #[serde(rename = "T")]
    pub big_t: Option<f64>,
    /// Sweep all a <= a-max, b <= b-max
    #[arg(long)]
    pub table: bool,
    #[arg(long, default_value_t = 20)]
    pub a_max: u64,
    #[arg(long, default_value_t = 45)]
    pub b_max: u64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct FreqArgs {
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long = "R")]
    #[serde(rename = "R")]
    pub big_r: Option<f64>,
    /// both_less | both_greater | less_greater | greater_less (or less / greater)
    #[arg(long, default_value = "both_greater")]
    pub event: Event,
    /// closed | quadrature | mc
    #[arg(long, default_value = "closed")]
    pub method: Method,
    /// Orbits for Monte Carlo
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
    /// Points per orbit for Monte Carlo
    #[arg(long, default_value_t = 50)]
    pub orbit: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Orbit steps discarded before counting
    #[arg(long, default_value_t = cfcoef::frequency::DEFAULT_BURN_IN)]
    pub burn_in: usize,
    /// Closed form, quadrature and Monte Carlo side by side
    #[arg(long)]
    pub compare: bool,
    /// Evaluate the limiting distribution of D_n at these points (comma separated)
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub dist: Vec<f64>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 2.9)]
    pub r: f64,
    #[arg(long = "R", default_value_t = 3.6)]
    #[serde(rename = "R")]
    pub big_r: f64,
    /// Random starting points
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    /// Orbit points checked per sample
    #[arg(long, default_value_t = 50)]
    pub orbit: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Bits of the random dyadic starting points
    #[arg(long, default_value_t = cfcoef::cf::DEFAULT_SAMPLE_BITS)]
    pub bits: u64,
    /// Relative slack allowed for the floating bound values
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
    /// Show that Tong's C-bound leaves (1, 2)
    #[arg(long, conflicts_with = "sharpness")]
    pub counterexample_tong_c: bool,
    /// Build a witness attaining a D-bound
    #[arg(long)]
    pub sharpness: bool,
    #[arg(long)]
    pub a: Option<u64>,
    #[arg(long)]
    pub b: Option<u64>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long = "T")]
    #[serde(rename = "T")]
    pub big_t: Option<f64>,
    #[arg(long, default_value_t = 1e-4)]
    pub eps: f64,
    /// below (lower bound) | above (upper bound)
    #[arg(long, default_value = "above")]
    pub direction: Direction,
}
