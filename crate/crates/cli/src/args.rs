use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::output::Format;

/// Lazy-bit rejection sampling: decisions, sampling, bounds and checks.
#[derive(Debug, Parser)]
#[command(name = "lazybits", version, about)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Master seed for every pseudo-random stream.
    #[arg(long, global = true, env = "LAZYBITS_SEED", default_value_t = 1)]
    pub seed: u64,

    /// Worker threads; 0 uses one per core. Never changes the output.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    /// Output format; defaults to the extension of --out, else csv.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Cuts allowed per decision before giving up.
    #[arg(long, global = true, default_value_t = lazybits::engine::DEFAULT_CUT_CAP)]
    pub cut_cap: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lower bound, series bounds and the quadratic bound for a range of n.
    Bounds(BoundsArgs),
    /// Run one decision on given tapes or on seeded variates.
    Decide(DecideArgs),
    /// Draw accepted samples under f.
    Sample(SampleArgs),
    /// Estimate expected bits per decision.
    Bench(BenchArgs),
    /// Check the crossing-count bound on random monotone grids.
    #[command(name = "verify-prop1")]
    VerifyProp1(VerifyProp1Args),
    /// Check the n+1 cut floor on the hard function under every strategy.
    #[command(name = "verify-lb")]
    VerifyLb(VerifyLbArgs),
    /// Chi-square test of accepted samples against the density of f.
    Gof(GofArgs),
    /// Log-log slope of a bound curve.
    Fit(FitArgs),
    /// Randomized monotonicity check of a built-in.
    #[command(name = "check-monotone")]
    CheckMonotone(CheckMonotoneArgs),
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    /// Single n or inclusive range a..b.
    #[arg(long, default_value = "1..10")]
    pub n: String,
    /// Certified truncation error of each series.
    #[arg(long, default_value_t = 1e-9)]
    pub eps: f64,
}

#[derive(Debug, Args)]
pub struct DecideArgs {
    /// Function spec, e.g. identity, hard, constant:1/2, staircase:8.
    #[arg(long = "fn")]
    pub function: String,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// Comma-separated rationals p/q for x_1..x_{n+1}; omit to use the seed.
    #[arg(long)]
    pub tapes: Option<String>,
    #[arg(long, default_value = "alt")]
    pub strategy: String,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long = "fn")]
    pub function: String,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long, default_value_t = 10)]
    pub count: u64,
    /// Bits per coordinate in the emitted points.
    #[arg(long, default_value_t = 32)]
    pub precision: u32,
    #[arg(long, default_value = "alt")]
    pub strategy: String,
    #[arg(long, default_value_t = lazybits::engine::DEFAULT_ATTEMPT_CAP)]
    pub attempt_cap: u64,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Function spec, or threshold:c to compare a single variate with c.
    #[arg(long = "fn")]
    pub function: String,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long, default_value = "alt")]
    pub strategy: String,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
}

#[derive(Debug, Args)]
pub struct VerifyProp1Args {
    /// Grid sizes M_1,...,M_{n+1}.
    #[arg(long, default_value = "4,4")]
    pub dims: String,
    #[arg(long, default_value_t = 1000)]
    pub cases: u64,
}

#[derive(Debug, Args)]
pub struct VerifyLbArgs {
    #[arg(long, default_value = "1..4")]
    pub n: String,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    /// A strategy name, or `all`.
    #[arg(long, default_value = "all")]
    pub strategy: String,
}

#[derive(Debug, Args)]
pub struct GofArgs {
    #[arg(long = "fn", default_value = "identity")]
    pub function: String,
    #[arg(long, default_value_t = 100_000)]
    pub count: u64,
    #[arg(long, default_value_t = 10)]
    pub bins: usize,
    #[arg(long, default_value = "alt")]
    pub strategy: String,
    /// Exit with status 4 when the p-value falls below this.
    #[arg(long, default_value_t = 1e-3)]
    pub alpha: f64,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// theorem1, slack1, slack2 or lower.
    #[arg(long, default_value = "theorem1")]
    pub curve: String,
    #[arg(long, default_value = "10..200")]
    pub n: String,
    #[arg(long, default_value_t = 1e-9)]
    pub eps: f64,
}

#[derive(Debug, Args)]
pub struct CheckMonotoneArgs {
    #[arg(long = "fn")]
    pub function: String,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
}
