use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use condroc::{DirectionMode, PsiFunctional};

#[derive(Debug, Parser)]
#[command(name = "condroc", version, about = "Compare dependent ROC curves conditioned on covariates")]
pub struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate one conditional ROC curve and write (p, roc) rows.
    Estimate(EstimateArgs),
    /// Test equality of all marker ROC curves at a conditioning point.
    Test(TestArgs),
    /// Run level/power experiments described by a TOML plan.
    Simulate(SimulateArgs),
    /// Write one of the bundled synthetic datasets.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Dataset CSV with columns status, x1..xd, y1..yK.
    #[arg(long)]
    pub data: PathBuf,
    /// Conditioning point, comma separated (on the scale after --log-cols).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    pub x: Vec<f64>,
    /// Columns to replace by their natural logarithm, e.g. `x2,y1`.
    #[arg(long, value_delimiter = ',')]
    pub log_cols: Vec<String>,
    /// Standardize covariates (d >= 2; on by default).
    #[arg(long, overrides_with = "no_standardize")]
    pub standardize: bool,
    /// Keep covariates on their original scale.
    #[arg(long, overrides_with = "standardize")]
    pub no_standardize: bool,
    /// Number of equispaced probability grid points.
    #[arg(long, default_value_t = condroc::roc::DEFAULT_GRID_SIZE)]
    pub grid: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file (written atomically); standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl DataArgs {
    pub fn standardize(&self) -> bool {
        !self.no_standardize
    }
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Marker column index (1-based).
    #[arg(long, default_value_t = 1)]
    pub marker: usize,
    /// Diseased projection direction (d >= 2); drawn from --seed when omitted.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub beta_f: Option<Vec<f64>>,
    /// Healthy projection direction (d >= 2).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub beta_g: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PsiArg {
    L2,
    Ks,
}

impl From<PsiArg> for PsiFunctional {
    fn from(p: PsiArg) -> Self {
        match p {
            PsiArg::L2 => PsiFunctional::L2,
            PsiArg::Ks => PsiFunctional::Ks,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Grid,
    Paired,
    Single,
}

impl From<ModeArg> for DirectionMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Grid => DirectionMode::Grid,
            ModeArg::Paired => DirectionMode::Paired,
            ModeArg::Single => DirectionMode::Single,
        }
    }
}

#[derive(Debug, Args)]
pub struct TestArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, default_value = "l2")]
    pub psi: PsiArg,
    /// Bootstrap replicates.
    #[arg(long = "B", default_value_t = 200)]
    pub b: usize,
    /// Directions per population in grid mode.
    #[arg(long, default_value_t = 5)]
    pub n_beta: usize,
    /// Direction pairs in paired mode.
    #[arg(long, default_value_t = 25)]
    pub m_beta: usize,
    #[arg(long, value_enum, default_value = "grid")]
    pub mode: ModeArg,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// TOML plan: one experiment at top level, or `[[experiment]]` tables.
    #[arg(long)]
    pub plan: PathBuf,
    /// Overrides the plan seed(s).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Results CSV (written atomically); standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SynthKind {
    /// d = 2, two markers drawn from the same scenario (no difference).
    H0,
    /// d = 1, two binormal markers with known ROC curves.
    Binormal,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, value_enum)]
    pub kind: SynthKind,
    /// Observations per population (default 100 for h0, 2000 for binormal).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
