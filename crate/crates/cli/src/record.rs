//! The JSON run record written by `train` and `denoise`.

use serde::{Deserialize, Serialize};
use tae_core::spectral::SpectralReport;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// Agreement of the final assignments with the label column.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ari: Option<f64>,
    /// Training-set reconstruction error of the tensorized model.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mse: Option<f64>,
    /// Held-out denoising errors.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mse_tae: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mse_ae: Option<f64>,
    /// Error of the corrupted inputs themselves.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mse_noisy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub command: String,
    /// `ok` or `diverged`.
    pub status: String,
    /// Everything needed to rerun the command.
    pub config: serde_json::Value,
    pub seed: u64,
    /// Loss at initialization, then after every epoch.
    pub loss_trace: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub final_loss: Option<f64>,
    pub epochs_run: usize,
    pub converged: bool,
    pub metrics: Metrics,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub spectral_report: Option<SpectralReport>,
    pub wall_clock_seconds: f64,
}
