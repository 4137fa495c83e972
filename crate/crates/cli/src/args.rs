use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rbm_core::Algorithm;

#[derive(Debug, Parser)]
#[command(name = "rbm", version, about = "Train, evaluate and sample binary RBMs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train one or more trials and write traces, parameters and a summary.
    Train(TrainArgs),
    /// Average log-likelihood of a dataset under a saved model, as one JSON line.
    Eval(EvalArgs),
    /// Sample from a saved model and write a PGM grid.
    Generate(GenerateArgs),
    /// Time fixed-epoch training runs per algorithm.
    Bench(BenchArgs),
    /// Materialize a dataset as BMAT or CSV.
    Dataset(DatasetArgs),
}

/// How a dataset source is turned into binary vectors.
#[derive(Debug, Clone, Args)]
pub struct LoadArgs {
    /// `threshold[:T]` or `stochastic` (IDX inputs only).
    #[arg(long, default_value = "stochastic")]
    pub binarize: String,
    /// Seed for stochastic binarization.
    #[arg(long, default_value_t = 0)]
    pub binarize_seed: u64,
    /// Keep only the first N rows.
    #[arg(long)]
    pub limit: Option<usize>,
}

impl Default for LoadArgs {
    fn default() -> Self {
        Self {
            binarize: "stochastic".into(),
            binarize_seed: 0,
            limit: None,
        }
    }
}

/// Training hyperparameters; each flag overrides the preset and config file.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// TOML or JSON file with TrainConfig fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `bars3` or `mnist`.
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long)]
    pub algorithm: Option<Algorithm>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub k_prime: Option<usize>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub lambda_h: Option<f64>,
    #[arg(long)]
    pub nu_mu: Option<f64>,
    #[arg(long)]
    pub nu_lambda: Option<f64>,
    #[arg(long, conflicts_with = "full_batch")]
    pub batch_size: Option<usize>,
    /// One minibatch containing the whole dataset.
    #[arg(long)]
    pub full_batch: bool,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub shuffle: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum EvalMethod {
    /// Exact when the smaller layer can be enumerated, AIS otherwise.
    #[default]
    Auto,
    Exact,
    Ais,
}

#[derive(Debug, Clone, Args)]
pub struct AisArgs {
    #[arg(long, default_value_t = 100)]
    pub ais_particles: usize,
    #[arg(long, default_value_t = 10_000)]
    pub ais_intermediate: usize,
}

impl Default for AisArgs {
    fn default() -> Self {
        Self {
            ais_particles: 100,
            ais_intermediate: 10_000,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    /// File path or `bars-stripes:D[:distinct|weighted|sampled:N[:SEED]]`.
    #[arg(long)]
    pub dataset: String,
    #[arg(long)]
    pub test_dataset: Option<String>,
    #[arg(long)]
    pub hidden: usize,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(flatten)]
    pub load: LoadArgs,
    #[arg(long, default_value_t = 1)]
    pub eval_every: usize,
    #[arg(long, value_enum, default_value_t = EvalMethod::Auto)]
    pub eval_method: EvalMethod,
    #[command(flatten)]
    pub ais: AisArgs,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
    /// Number of trials; seeds default to `seed, seed+1, …`.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Explicit comma-separated seed list, one per trial.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    /// Trials run concurrently.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Write 0 in the wall-clock column so that traces are reproducible.
    #[arg(long)]
    pub omit_timing: bool,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub params: PathBuf,
    #[arg(long)]
    pub dataset: String,
    #[command(flatten)]
    pub load: LoadArgs,
    #[arg(long, value_enum, default_value_t = EvalMethod::Auto)]
    pub method: EvalMethod,
    #[command(flatten)]
    pub ais: AisArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub params: PathBuf,
    #[arg(long, default_value_t = 25)]
    pub count: usize,
    /// Gibbs steps per sample; defaults to 200 for small models, 5000 otherwise.
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(long, default_value = "bars-stripes:3")]
    pub dataset: String,
    #[arg(long, default_value_t = 4)]
    pub hidden: usize,
    #[arg(long, value_delimiter = ',', default_value = "CD,CG,SDCP,SDCPD")]
    pub algorithms: Vec<Algorithm>,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(flatten)]
    pub load: LoadArgs,
    /// Print JSON instead of a table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
pub struct DatasetArgs {
    /// File path or `bars-stripes:D[:mode]`.
    #[arg(long)]
    pub source: String,
    #[command(flatten)]
    pub load: LoadArgs,
    /// `.csv` writes CSV, anything else BMAT.
    #[arg(long)]
    pub out: PathBuf,
}
