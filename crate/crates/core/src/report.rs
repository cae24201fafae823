//! Serializable test reports.

use serde::{Deserialize, Serialize};

use crate::multivariate::DirectionMode;
use crate::study::StandardizationParams;
use crate::univariate::PsiFunctional;

/// Bandwidths chosen on the original sample and frozen for the bootstrap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandwidthReport {
    /// `diseased[r][k]`: regression bandwidth of marker `k` along diseased direction `r`.
    pub diseased: Vec<Vec<f64>>,
    pub healthy: Vec<Vec<f64>>,
    /// `pooled[pair][k]`: sample-size weighted bandwidth used in the statistic.
    pub pooled: Vec<Vec<f64>>,
    /// ROC smoothing bandwidth `h`.
    pub smoothing: f64,
}

/// One direction pair and the projected conditioning values it produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionPairRecord {
    pub beta_f: Vec<f64>,
    pub beta_g: Vec<f64>,
    pub x_f: f64,
    pub x_g: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Bootstrap replicates dropped because estimation failed.
    pub failed_replicates: usize,
    /// Conditional standard deviations at the conditioning values that sat
    /// on the variance floor (original sample, summed over pairs and markers).
    pub floored_sd_at_x: usize,
    /// Points skipped by cross-validation at the selected bandwidths.
    pub lscv_skipped_points: usize,
    /// Set for the single-projection variant, whose null hypothesis is not
    /// known to be equivalent to the full one.
    pub experimental: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub statistic: f64,
    pub p_value: f64,
    #[serde(rename = "B_effective")]
    pub b_effective: usize,
    pub psi: PsiFunctional,
    pub bandwidths: BandwidthReport,
    pub seed: u64,
    pub bootstrap_stats: Vec<f64>,
    #[serde(rename = "B_requested")]
    pub b_requested: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mode: Option<DirectionMode>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub directions: Vec<DirectionPairRecord>,
    pub pair_statistics: Vec<f64>,
    /// Covariate scaling applied before projecting, if any.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub standardization: Option<StandardizationParams>,
    pub diagnostics: Diagnostics,
}
