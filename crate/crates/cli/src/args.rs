//! Command-line flags.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use tae_core::linear::ReconstructionForm;
use tae_core::mlp::{Activation, MlpArch};
use tae_core::{SUpdate, TrainConfig};

#[derive(Debug, Parser)]
#[command(
    name = "tae",
    version,
    about = "Tensorized autoencoders: cluster-specific embeddings with k-means regularization"
)]
pub struct Cli {
    /// Log more (-v info, -vv debug). RUST_LOG overrides.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a planted anisotropic mixture and write it as CSV.
    Gen(GenArgs),
    /// Train a tensorized autoencoder and write the model and a run record.
    Train(TrainArgs),
    /// Assign every row of a CSV file to a cluster of a trained model.
    Cluster(ClusterArgs),
    /// Compare held-out denoising error of the tensorized and single autoencoder.
    Denoise(DenoiseArgs),
    /// Check a trained linear model against the closed-form optimum.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Preset {
    Crossing,
    ThreeOriented,
    Nested,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Planted-mixture spec as JSON.
    #[arg(long, required_unless_present = "preset", conflicts_with = "preset")]
    pub spec: Option<PathBuf>,
    /// Built-in spec instead of a file.
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Replaces the spec's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SUpdateArg {
    #[default]
    Lloyd,
    Pgd,
}

impl From<SUpdateArg> for SUpdate {
    fn from(value: SUpdateArg) -> Self {
        match value {
            SUpdateArg::Lloyd => SUpdate::Lloyd,
            SUpdateArg::Pgd => SUpdate::ProjectedGradient,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ArchArg {
    #[default]
    Linear,
    Mlp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ActivationArg {
    #[default]
    Relu,
    Tanh,
    Identity,
}

impl From<ActivationArg> for Activation {
    fn from(value: ActivationArg) -> Self {
        match value {
            ActivationArg::Relu => Activation::Relu,
            ActivationArg::Tanh => Activation::Tanh,
            ActivationArg::Identity => Activation::Identity,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum ReconFormArg {
    #[default]
    Projection,
    Residual,
}

impl From<ReconFormArg> for ReconstructionForm {
    fn from(value: ReconFormArg) -> Self {
        match value {
            ReconFormArg::Projection => ReconstructionForm::Projection,
            ReconFormArg::Residual => ReconstructionForm::Residual,
        }
    }
}

/// Which columns of the input CSV to use.
#[derive(Debug, Clone, Args, Serialize, Deserialize, PartialEq)]
pub struct ColumnOptions {
    /// Comma-separated feature columns (default: every column but the label).
    #[arg(long, value_delimiter = ',')]
    pub features: Vec<String>,
    /// Ground-truth label column, used for ARI when present in the file.
    #[arg(long, default_value = "label")]
    pub label_col: String,
}

/// Model and optimizer settings shared by `train` and `denoise`.
#[derive(Debug, Clone, Args, Serialize, Deserialize, PartialEq)]
pub struct ModelOptions {
    /// Number of clusters.
    #[arg(long)]
    pub k: Option<usize>,
    /// Latent dimension h.
    #[arg(long, default_value_t = 1)]
    pub latent: usize,
    #[arg(long, default_value_t = 0.1)]
    pub lambda: f64,
    #[arg(long, default_value_t = 300)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.05)]
    pub lr: f64,
    #[arg(long, value_enum, default_value_t)]
    pub s_update: SUpdateArg,
    #[arg(long, value_enum, default_value_t)]
    pub arch: ArchArg,
    /// Hidden width of the MLP (default 2·d).
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long, value_enum, default_value_t)]
    pub activation: ActivationArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Relative loss change that ends training early.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

impl ModelOptions {
    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            learning_rate: self.lr,
            lambda: self.lambda,
            latent_dim: self.latent,
            s_update: self.s_update.into(),
            seed: self.seed,
            tol: self.tol,
        }
    }

    pub fn mlp_arch(&self) -> MlpArch {
        MlpArch {
            hidden: self.hidden,
            activation: self.activation.into(),
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Training data CSV.
    #[arg(long, required_unless_present = "from_record")]
    pub data: Option<PathBuf>,
    #[command(flatten)]
    pub columns: ColumnOptions,
    /// Standardize features before training; the model stores the transform.
    #[arg(long)]
    pub normalize: bool,
    #[command(flatten)]
    pub model: ModelOptions,
    /// Where to write the trained model JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Where to write the run record JSON (printed to stdout otherwise).
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Where to write the final training assignments as CSV.
    #[arg(long)]
    pub assignments_out: Option<PathBuf>,
    /// Rerun exactly the configuration echoed in an earlier run record.
    #[arg(long)]
    pub from_record: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub columns: ColumnOptions,
    /// Output CSV (stdout otherwise).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DenoiseArgs {
    /// Clean data CSV; a held-out part is corrupted and reconstructed.
    #[arg(long)]
    pub data_clean: PathBuf,
    #[command(flatten)]
    pub columns: ColumnOptions,
    #[arg(long, default_value_t = 0.3)]
    pub noise_sigma: f64,
    #[arg(long, default_value_t = 0.8)]
    pub train_fraction: f64,
    /// Also corrupt the training split (by default training sees clean data).
    #[arg(long)]
    pub corrupt_train: bool,
    #[arg(long, value_enum, default_value_t)]
    pub recon_form: ReconFormArg,
    #[command(flatten)]
    pub model: ModelOptions,
    #[arg(long)]
    pub model_out: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub columns: ColumnOptions,
    /// Assignments CSV with a `cluster` column; by default every row goes to
    /// its cheapest cluster.
    #[arg(long)]
    pub assignments: Option<PathBuf>,
    /// Also write the report to this file.
    #[arg(long)]
    pub report: Option<PathBuf>,
}
