use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use matseq::randomized_test::Quadrature;
use matseq::{Axis, DgpSpec, Method, Result, TestConfig, ThresholdRule};

#[derive(Debug, Parser)]
#[command(name = "matseq", version, about = "Randomized factor-structure tests for matrix time series")]
pub struct Cli {
    /// Worker threads (0 = one per core). Results do not depend on it.
    #[arg(long, global = true, env = "MATSEQ_THREADS", default_value_t = 0)]
    pub threads: usize,

    /// Write the run manifest here instead of to stderr.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Command {
    /// Simulate a matrix series and write it as long-format CSV.
    Simulate(SimulateArgs),
    /// Estimate k1 and k2 and classify the factor structure.
    Estimate(EstimateArgs),
    /// Run a single test of H0: k >= k0 on one axis.
    Test(TestArgs),
    /// Run a Monte Carlo scenario grid.
    Bench(BenchArgs),
    /// Compare Psi at a fixed phi with its chi-squared(1) limit.
    Calibrate(CalibrateArgs),
    /// Re-run the command recorded in a manifest.
    Rerun(RerunArgs),
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct DgpArgs {
    #[arg(long, default_value_t = 100)]
    pub p1: usize,
    #[arg(long, default_value_t = 15)]
    pub p2: usize,
    /// Number of time points.
    #[arg(long = "T", default_value_t = 100)]
    #[serde(rename = "T")]
    pub t: usize,
    #[arg(long, default_value_t = 1)]
    pub k1: usize,
    #[arg(long, default_value_t = 1)]
    pub k2: usize,
    /// AR coefficient of the factors.
    #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
    pub phi: f64,
    /// AR coefficient of the noise.
    #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
    pub psi: f64,
    /// Noise cross-correlation: off-diagonals a/p1 and a/p2.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub a: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub burn_in: usize,
}

impl DgpArgs {
    pub fn to_spec(&self) -> DgpSpec {
        DgpSpec {
            p1: self.p1,
            p2: self.p2,
            t: self.t,
            k1: self.k1,
            k2: self.k2,
            phi: self.phi,
            psi: self.psi,
            a: self.a,
            seed: self.seed,
            burn_in: self.burn_in,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub dgp: DgpArgs,
    /// Output CSV (stdout if omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct TestConfigArgs {
    /// flattened (STP1) or projected (STP2).
    #[arg(long, default_value_t = Method::Projected)]
    pub method: Method,
    #[arg(long, default_value_t = 0.01)]
    pub alpha: f64,
    /// Artificial draws per round.
    #[arg(long = "draws", visible_alias = "M", default_value_t = 300)]
    pub draws: usize,
    /// Randomization rounds.
    #[arg(long = "rounds", visible_alias = "S", default_value_t = 300)]
    pub rounds: usize,
    #[arg(long, default_value_t = 0.05)]
    pub epsilon: f64,
    /// lil, power-third, power-quarter, power-fifth or half-level.
    #[arg(long, default_value_t = ThresholdRule::PowerQuarter)]
    pub threshold: ThresholdRule,
    #[arg(long = "kmax", visible_alias = "k-max", default_value_t = 8)]
    pub kmax: usize,
    /// `four-point` (rounded four-point rule) or `hermite:N`.
    #[arg(long, default_value = "four-point")]
    pub quadrature: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl TestConfigArgs {
    pub fn to_config(&self) -> Result<TestConfig> {
        let config = TestConfig {
            k_max: self.kmax,
            alpha: self.alpha,
            draws: self.draws,
            rounds: self.rounds,
            epsilon: self.epsilon,
            threshold_rule: self.threshold,
            method: self.method,
            quadrature: Quadrature::parse(&self.quadrature)?,
            seed: self.seed,
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct EstimateArgs {
    /// Long-format CSV with header t,i,j,value.
    #[arg(long, short)]
    pub input: PathBuf,
    /// Standardize every cell over time before testing.
    #[arg(long)]
    pub standardize: bool,
    /// Include every test record with its Psi values.
    #[arg(long)]
    pub full: bool,
    #[command(flatten)]
    pub config: TestConfigArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct TestArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long)]
    pub axis: Axis,
    #[arg(long)]
    pub k0: usize,
    #[arg(long)]
    pub standardize: bool,
    #[command(flatten)]
    pub config: TestConfigArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct BenchArgs {
    /// Built-in scenario grid (table1-desk, table2-desk, table1, table2).
    #[arg(long, conflicts_with = "scenario", required_unless_present = "scenario")]
    pub preset: Option<String>,
    /// Scale of a table preset: desk or full.
    #[arg(long, requires = "preset")]
    pub scale: Option<String>,
    /// key=value scenario file.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Override the number of replications of every scenario.
    #[arg(long)]
    pub replications: Option<usize>,
    /// Base seed (presets default to 0; overrides the file's `seed`).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override the structure mode: joint, row-axis or none.
    #[arg(long)]
    pub structure: Option<String>,
    /// Include wall-clock times in the JSON report.
    #[arg(long)]
    pub timing: bool,
    /// Write the text table here instead of to stderr.
    #[arg(long)]
    pub table: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct CalibrateArgs {
    #[arg(long, default_value_t = 1e6)]
    pub phi: f64,
    #[arg(long = "draws", visible_alias = "M", default_value_t = 10_000)]
    pub draws: usize,
    #[arg(long, default_value_t = 2000)]
    pub n_outer: usize,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value = "four-point")]
    pub quadrature: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct RerunArgs {
    /// Manifest written by an earlier run.
    pub path: PathBuf,
}
