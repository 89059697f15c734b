use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fhg_core::Rational;

#[derive(Parser, Debug)]
#[command(name = "fhg", version, about = "Online fractional hedonic game experiments")]
pub struct Cli {
    /// TOML file with a default seed and cap overrides
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write an instance file
    Gen(GenArgs),
    /// Measure one algorithm on one instance
    Run(RunArgs),
    /// Measure several algorithms on several instances
    Sweep(SweepArgs),
    /// Play the dissolution adversary against an algorithm
    Adversary(AdversaryArgs),
    /// Run invariant suites
    Verify(VerifyArgs),
    /// Matching probabilities of a star policy
    StarProb(StarProbArgs),
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[command(subcommand)]
    pub kind: GenKind,
}

#[derive(Subcommand, Debug)]
pub enum GenKind {
    /// Uniform random rational weights on every pair
    Random(RandomArgs),
    /// Random tree-domain instance
    Tree(RandomArgs),
    /// Star instance
    Star(StarArgs),
    /// Bi-star instance
    Bistar(StarArgs),
}

#[derive(Args, Debug)]
pub struct RandomArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// weight range lo:hi[:max_denominator]; defaults to -10:10:4, or 1:10:4 for trees
    #[arg(long)]
    pub range: Option<String>,
    /// output file, stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct StarShape {
    #[arg(long = "I", value_delimiter = ',', required = true)]
    pub i: Vec<u32>,
    #[arg(long = "J", value_delimiter = ',')]
    pub j: Vec<u32>,
    #[arg(long)]
    pub eps: Rational,
    /// negative weights are -(1/eps)^x; defaults to the smallest legal x
    #[arg(long)]
    pub x: Option<u32>,
}

#[derive(Args, Debug, Clone)]
pub struct StarArgs {
    #[command(flatten)]
    pub shape: StarShape,
    /// write the spec instead of the instance
    #[arg(long)]
    pub spec: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeArg {
    Strict,
    Dissolve,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExpectArg {
    Exact,
    Mc,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum FormatArg {
    Csv,
    Json,
}

/// Options shared by `run` and `sweep`.
#[derive(Args, Debug, Clone)]
pub struct MeasureArgs {
    #[arg(long, value_enum, default_value = "strict")]
    pub mode: ModeArg,
    /// order:<comma separated agents>, random or worst
    #[arg(long, default_value = "random")]
    pub arrival: String,
    /// for random arrival: exact expectation over all orders, or sampling
    #[arg(long, value_enum, default_value = "exact")]
    pub expect: ExpectArg,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: FormatArg,
    /// eps of the star family, for star:f=... algorithms
    #[arg(long = "star-eps")]
    pub star_eps: Option<Rational>,
    /// x of the star family, for star:f=... algorithms
    #[arg(long = "star-x")]
    pub star_x: Option<u32>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    pub instance: PathBuf,
    #[arg(long)]
    pub alg: String,
    #[command(flatten)]
    pub m: MeasureArgs,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// instance files or directories of *.json files
    pub instances: Vec<PathBuf>,
    /// also generate this many random instances
    #[arg(long, default_value_t = 0)]
    pub random: usize,
    /// size of generated instances
    #[arg(long, default_value_t = 6)]
    pub n: usize,
    #[arg(long)]
    pub range: Option<String>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub algs: Vec<String>,
    #[command(flatten)]
    pub m: MeasureArgs,
}

#[derive(Args, Debug)]
pub struct AdversaryArgs {
    #[arg(long)]
    pub alg: String,
    #[arg(long, default_value = "1/5")]
    pub gamma: Rational,
    #[arg(long, default_value_t = 4)]
    pub phases: usize,
    /// leaves per leaf set while building stars
    #[arg(long = "agents-per-phase", default_value_t = 10_000)]
    pub agents_per_phase: usize,
    /// increment waves per phase
    #[arg(long, default_value_t = 1000)]
    pub waves: usize,
    /// bundle file
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// suite names, or "all"
    #[arg(required = true)]
    pub suites: Vec<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub cases: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub beta: Vec<Rational>,
    #[arg(long = "max-steps")]
    pub max_steps: Option<usize>,
    /// star policies for the hr suite
    #[arg(long, value_delimiter = ',')]
    pub f: Vec<String>,
    #[arg(long = "maxI")]
    pub max_i: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub gamma: Vec<Rational>,
    #[arg(long)]
    pub specs: Option<usize>,
    #[arg(long)]
    pub phases: Option<usize>,
    #[arg(long)]
    pub waves: Option<usize>,
    /// write the JSON summary here as well as to stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct StarProbArgs {
    #[command(flatten)]
    pub shape: StarShape,
    /// star policy: zero, one, half, two-thirds, ramp, late, parity or p/q
    #[arg(long, default_value = "one")]
    pub f: String,
    /// also run the max-edge conversion check for these algorithms
    #[arg(long, value_delimiter = ',')]
    pub check: Vec<String>,
    #[arg(long, value_enum, default_value = "star")]
    pub kind: KindArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum KindArg {
    Star,
    Bistar,
}
