//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pegi_core::{FieldKind, IterationConfig};

use crate::config::{parse_count, parse_list_flag, Algorithm, Overrides, Panel};

// Aliases keep clap from treating the lists as repeated flags; each list
// is one comma-separated value.
type CountList = Vec<usize>;
type PowerList = Vec<f64>;
type AlgorithmList = Vec<Algorithm>;

/// Directory used when `--out` is not given.
pub const OUT_DIR_ENV: &str = "PEGI_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "pegi", version, about = "Noisy ICA: simulate, estimate, demix and benchmark")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a random model and one sample batch, and write both to disk.
    Simulate(RunArgs),
    /// Recover the mixing directions from a sample file.
    Estimate(EstimateArgs),
    /// Build a demixing matrix and apply it to a sample file.
    Demix(DemixArgs),
    /// Sweep sample sizes and noise powers over seeded trials.
    Benchmark(RunArgs),
    /// Summarize a benchmark CSV as per-(N, p) tables.
    Report(ReportArgs),
}

/// Run-configuration flags. Every flag overrides the matching key of
/// `--config`.
#[derive(Debug, Args, Default)]
pub struct RunArgs {
    /// `key = value` file with defaults for any of the flags below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    /// Sample sizes, e.g. `1e4,1e5`.
    #[arg(long, value_parser = |s: &str| parse_list_flag(s, parse_count))]
    pub samples: Option<CountList>,
    #[arg(long, value_parser = |s: &str| parse_list_flag(s, |x| x.parse::<f64>().map_err(|e| e.to_string())))]
    pub noise_power: Option<PowerList>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// `default`, `finite`, or a list such as `laplace,uniform`.
    #[arg(long, value_parser = |s: &str| s.parse::<Panel>())]
    pub panel: Option<Panel>,
    #[arg(long, value_parser = |s: &str| parse_list_flag(s, |x| x.parse::<Algorithm>()))]
    pub algo: Option<AlgorithmList>,
    #[command(flatten)]
    pub iteration: IterationArgs,
    /// Condition number of the random mixing matrices.
    #[arg(long)]
    pub cond: Option<f64>,
    #[arg(long, value_enum)]
    pub field: Option<FieldArg>,
    /// Record wall-clock runtimes (makes the output run-dependent).
    #[arg(long)]
    pub timing: bool,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Default, Clone)]
pub struct IterationArgs {
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub max_restarts: Option<usize>,
    /// Gaussianity guard: minimum z-score of a direction's fourth cumulant.
    #[arg(long)]
    pub min_kurtosis_z: Option<f64>,
}

impl IterationArgs {
    /// `base` with the given flags substituted.
    pub fn apply(&self, base: IterationConfig) -> IterationConfig {
        IterationConfig {
            epsilon: self.epsilon.unwrap_or(base.epsilon),
            max_iters: self.max_iters.unwrap_or(base.max_iters),
            max_restarts: self.max_restarts.unwrap_or(base.max_restarts),
            min_kurtosis_z: self.min_kurtosis_z.unwrap_or(base.min_kurtosis_z),
            ..base
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FieldArg {
    Real,
    Complex,
}

impl From<FieldArg> for FieldKind {
    fn from(f: FieldArg) -> Self {
        match f {
            FieldArg::Real => FieldKind::Real,
            FieldArg::Complex => FieldKind::Complex,
        }
    }
}

impl RunArgs {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            n: self.n,
            m: self.m,
            samples: self.samples.clone(),
            noise_powers: self.noise_power.clone(),
            trials: self.trials,
            seed: self.seed,
            panel: self.panel.clone(),
            algorithms: self.algo.clone(),
            epsilon: self.iteration.epsilon,
            max_iters: self.iteration.max_iters,
            max_restarts: self.iteration.max_restarts,
            min_kurtosis_z: self.iteration.min_kurtosis_z,
            cond: self.cond,
            field: self.field.map(Into::into),
            timing: self.timing.then_some(true),
            out: self.out.clone(),
        }
    }
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Sample matrix, one observation per row.
    #[arg(long)]
    pub input: PathBuf,
    /// Number of columns to recover.
    #[arg(long)]
    pub m: usize,
    #[command(flatten)]
    pub iteration: IterationArgs,
    /// Seed for the random starting vectors.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Model directory to compare the estimate against.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DemixMode {
    #[value(name = "sinr_opt")]
    SinrOpt,
    Pinv,
}

#[derive(Debug, Args)]
pub struct DemixArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Estimate directory (uses its `a_hat.csv`) or a mixing matrix file.
    #[arg(long)]
    pub estimate: PathBuf,
    #[arg(long, value_enum, default_value = "sinr_opt")]
    pub mode: DemixMode,
    /// Model directory; adds an SINR report.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportMetric {
    Loss,
    Sinr,
    Angle,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Benchmark CSV.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "loss")]
    pub metric: ReportMetric,
    /// Also write the table to `<out>/report.csv`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// `--out`, else `$PEGI_OUT_DIR`, else the working directory.
pub fn out_dir(flag: Option<&PathBuf>) -> PathBuf {
    flag.cloned()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}
