//! Empirical distribution tools and the smoothed pair-conditioned ROC
//! estimator built from location-scale residuals.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::kernel::{KernelSpec, RegressionFit};
use crate::quadrature::gauss_legendre_on;

pub const DEFAULT_GRID_SIZE: usize = 101;
pub const SMOOTHING_NODES: usize = 64;
pub const SMOOTHING_HALF_WIDTH: f64 = 6.0;

/// Strictly increasing probabilities inside `(0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct PGrid(Vec<f64>);

impl PGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidGrid("grid is empty".into()));
        }
        if values.iter().any(|&p| !(p > 0.0 && p < 1.0)) {
            return Err(Error::InvalidGrid("points must lie in (0, 1)".into()));
        }
        if values.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidGrid("points must be strictly increasing".into()));
        }
        Ok(Self(values))
    }

    /// `m` equispaced interior points `i / (m + 1)`.
    pub fn equispaced(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidGrid("grid size must be positive".into()));
        }
        Self::new((1..=m).map(|i| i as f64 / (m + 1) as f64).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Default for PGrid {
    fn default() -> Self {
        Self::equispaced(DEFAULT_GRID_SIZE).expect("default grid is valid")
    }
}

impl TryFrom<Vec<f64>> for PGrid {
    type Error = Error;
    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<PGrid> for Vec<f64> {
    fn from(grid: PGrid) -> Self {
        grid.0
    }
}

/// ROC values on a probability grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub grid: PGrid,
    pub values: Vec<f64>,
}

impl RocCurve {
    pub fn new(grid: PGrid, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::GridMismatch);
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidConfig("ROC values must lie in [0, 1]".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn sup_distance(&self, other: &RocCurve) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

/// Index (1-based rank) of the left-continuous inverse `inf{y : H(y) >= u}`
/// for a sample of size `n`. Products within 1e-9 of an integer are snapped
/// to it so that `u = j / n` maps to rank `j` despite rounding.
#[inline]
pub(crate) fn quantile_rank(u: f64, n: usize) -> usize {
    let t = u * n as f64;
    let r = t.round();
    let k = if (t - r).abs() < 1e-9 { r } else { t.ceil() };
    (k.max(1.0) as usize).min(n)
}

/// Empirical distribution of a sample, kept sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(Self { sorted })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    /// Fraction of the sample `<= y`.
    pub fn cdf(&self, y: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= y) as f64 / self.sorted.len() as f64
    }

    /// Left-continuous generalized inverse; `u <= 0` returns the minimum.
    pub fn quantile(&self, u: f64) -> f64 {
        self.sorted[quantile_rank(u, self.sorted.len()) - 1]
    }
}

pub fn ecdf(values: &[f64], y: f64) -> Result<f64> {
    Ok(EmpiricalCdf::new(values)?.cdf(y))
}

pub fn equantile(values: &[f64], u: f64) -> Result<f64> {
    Ok(EmpiricalCdf::new(values)?.quantile(u))
}

/// Location shift `a` and scale ratio `b` linking the two populations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftScale {
    pub a: f64,
    pub b: f64,
    /// One of the conditional standard deviations sat on its floor.
    pub floored: bool,
}

/// `a = (mu_F(xF) - mu_G(xG)) / sigma_F(xF)` and `b = sigma_G(xG) / sigma_F(xF)`.
pub fn ab_from_fits(fit_f: &RegressionFit, fit_g: &RegressionFit, x_f: f64, x_g: f64) -> Result<ShiftScale> {
    let f = fit_f.evaluate_at(x_f)?;
    let g = fit_g.evaluate_at(x_g)?;
    Ok(ShiftScale {
        a: (f.mean - g.mean) / f.sd,
        b: g.sd / f.sd,
        floored: f.floored || g.floored,
    })
}

/// Sample-size weighted bandwidth `(nF gF + nG gG) / (nF + nG)`.
pub fn pooled_bandwidth(g_f: f64, g_g: f64, n_f: usize, n_g: usize) -> f64 {
    (n_f as f64 * g_f + n_g as f64 * g_g) / (n_f + n_g) as f64
}

/// Smoothing bandwidth `1 / sqrt(n)` for total sample size `n`.
pub fn default_roc_bandwidth(n_total: usize) -> f64 {
    1.0 / (n_total as f64).sqrt()
}

/// Pointwise weighted mean of curves with weights proportional to `weights`.
pub fn weighted_average_curve(curves: &[RocCurve], weights: &[f64]) -> Result<RocCurve> {
    let first = curves.first().ok_or(Error::EmptyAggregation)?;
    if curves.len() != weights.len() {
        return Err(Error::DimensionMismatch(
            "one weight per curve is required".into(),
        ));
    }
    if weights.iter().any(|&w| !(w > 0.0)) {
        return Err(Error::InvalidConfig("curve weights must be positive".into()));
    }
    if curves.iter().any(|c| c.grid != first.grid) {
        return Err(Error::GridMismatch);
    }
    let total: f64 = weights.iter().sum();
    let norm: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let values = (0..first.grid.len())
        .map(|i| {
            curves
                .iter()
                .zip(&norm)
                .map(|(c, w)| w * c.values[i])
                .sum::<f64>()
                .clamp(0.0, 1.0)
        })
        .collect();
    Ok(RocCurve {
        grid: first.grid.clone(),
        values,
    })
}

struct SmoothingRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

fn smoothing_rule() -> &'static SmoothingRule {
    static RULE: OnceLock<SmoothingRule> = OnceLock::new();
    RULE.get_or_init(|| {
        let (nodes, w) = gauss_legendre_on(SMOOTHING_NODES, -SMOOTHING_HALF_WIDTH, SMOOTHING_HALF_WIDTH);
        let raw: Vec<f64> = nodes
            .iter()
            .zip(&w)
            .map(|(&u, &w)| w * KernelSpec::Gaussian.density(u))
            .collect();
        let total: f64 = raw.iter().sum();
        SmoothingRule {
            nodes,
            weights: raw.iter().map(|v| v / total).collect(),
        }
    })
}

/// `H_F(q_j * b - a)` for every order statistic `q_j` of the healthy sample.
fn transfer_table(sorted_f: &[f64], sorted_g: &[f64], a: f64, b: f64) -> Vec<f64> {
    let nf = sorted_f.len() as f64;
    let mut count = 0usize;
    sorted_g
        .iter()
        .map(|&q| {
            let y = q * b - a;
            while count < sorted_f.len() && sorted_f[count] <= y {
                count += 1;
            }
            count as f64 / nf
        })
        .collect()
}

/// Smoothed estimator on sorted residual samples:
/// `1 - sum_q w_q H_F(H_G^{-1}(1 - p + h u_q) b - a)` with Gauss-Legendre
/// nodes `u_q` on `[-6, 6]` against the Gaussian kernel. The quantile
/// argument is clamped to `[1/nG, 1]`.
pub(crate) fn smoothed_roc_sorted(sorted_f: &[f64], sorted_g: &[f64], a: f64, b: f64, h: f64, grid: &PGrid) -> Vec<f64> {
    let table = transfer_table(sorted_f, sorted_g, a, b);
    let ng = sorted_g.len();
    let lo = 1.0 / ng as f64;
    let rule = smoothing_rule();
    grid.values()
        .iter()
        .map(|&p| {
            let acc: f64 = rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .map(|(&u, &w)| {
                    let arg = (1.0 - p + h * u).clamp(lo, 1.0);
                    w * table[quantile_rank(arg, ng) - 1]
                })
                .sum();
            (1.0 - acc).clamp(0.0, 1.0)
        })
        .collect()
}

fn sorted_copy(values: &[f64]) -> Result<Vec<f64>> {
    Ok(EmpiricalCdf::new(values)?.sorted)
}

fn check_shift_scale(b: f64, h: f64) -> Result<()> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::InvalidConfig(format!("scale ratio must be positive, got {b}")));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidConfig(format!("smoothing bandwidth must be positive, got {h}")));
    }
    Ok(())
}

/// Smoothed conditional ROC from raw residual samples.
pub fn estimate_roc_from_residuals(
    residuals_f: &[f64],
    residuals_g: &[f64],
    a: f64,
    b: f64,
    h: f64,
    grid: &PGrid,
) -> Result<RocCurve> {
    check_shift_scale(b, h)?;
    let (sf, sg) = (sorted_copy(residuals_f)?, sorted_copy(residuals_g)?);
    Ok(RocCurve {
        grid: grid.clone(),
        values: smoothed_roc_sorted(&sf, &sg, a, b, h, grid),
    })
}

/// Everything the estimator needs for one marker at one conditioning pair.
#[derive(Debug, Clone, Copy)]
pub struct ConditionalRocInputs<'a> {
    pub fit_f: &'a RegressionFit,
    pub fit_g: &'a RegressionFit,
    pub a: f64,
    pub b: f64,
    pub h: f64,
}

pub fn estimate_conditional_roc(inputs: &ConditionalRocInputs<'_>, grid: &PGrid) -> Result<RocCurve> {
    estimate_roc_from_residuals(
        &inputs.fit_f.residuals,
        &inputs.fit_g.residuals,
        inputs.a,
        inputs.b,
        inputs.h,
        grid,
    )
}

/// Unsmoothed plug-in `1 - H_F(H_G^{-1}(1 - p) b - a)` at a single `p`.
pub fn plugin_roc_at(cdf_f: &EmpiricalCdf, cdf_g: &EmpiricalCdf, a: f64, b: f64, p: f64) -> f64 {
    let arg = (1.0 - p).clamp(1.0 / cdf_g.len() as f64, 1.0);
    1.0 - cdf_f.cdf(cdf_g.quantile(arg) * b - a)
}

/// Unsmoothed plug-in inverted curve `1 - H_G((H_F^{-1}(1 - q) + a) / b)` at
/// a single `q`: the functional inverse of [`plugin_roc_at`].
pub fn plugin_iroc_at(cdf_f: &EmpiricalCdf, cdf_g: &EmpiricalCdf, a: f64, b: f64, q: f64) -> f64 {
    let arg = (1.0 - q).clamp(1.0 / cdf_f.len() as f64, 1.0);
    1.0 - cdf_g.cdf((cdf_f.quantile(arg) + a) / b)
}

pub fn plugin_roc(residuals_f: &[f64], residuals_g: &[f64], a: f64, b: f64, grid: &PGrid) -> Result<RocCurve> {
    check_shift_scale(b, 1.0)?;
    let (f, g) = (EmpiricalCdf::new(residuals_f)?, EmpiricalCdf::new(residuals_g)?);
    Ok(RocCurve {
        grid: grid.clone(),
        values: grid.values().iter().map(|&p| plugin_roc_at(&f, &g, a, b, p)).collect(),
    })
}

/// Shift and scale of the problem with the two populations' roles swapped:
/// the ROC curve of the swapped problem is the inverted curve of the
/// original one, and swapping twice gives back `(a, b)`.
pub fn swap_roles(a: f64, b: f64) -> (f64, f64) {
    (-a / b, 1.0 / b)
}

/// Inverted conditional ROC curve from the fits' residuals (no smoothing).
pub fn iroc_from_samples(fit_f: &RegressionFit, fit_g: &RegressionFit, a: f64, b: f64, grid: &PGrid) -> Result<RocCurve> {
    iroc_from_residuals(&fit_f.residuals, &fit_g.residuals, a, b, grid)
}

pub fn iroc_from_residuals(residuals_f: &[f64], residuals_g: &[f64], a: f64, b: f64, grid: &PGrid) -> Result<RocCurve> {
    check_shift_scale(b, 1.0)?;
    let (f, g) = (EmpiricalCdf::new(residuals_f)?, EmpiricalCdf::new(residuals_g)?);
    Ok(RocCurve {
        grid: grid.clone(),
        values: grid.values().iter().map(|&q| plugin_iroc_at(&f, &g, a, b, q)).collect(),
    })
}

pub fn std_normal_cdf(x: f64) -> f64 {
    Normal::standard().cdf(x)
}

/// Standard normal quantile, polished with one Newton step.
pub fn std_normal_quantile(p: f64) -> f64 {
    let x = Normal::standard().inverse_cdf(p);
    if !x.is_finite() {
        return x;
    }
    let density = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    if density > 0.0 {
        x - (std_normal_cdf(x) - p) / density
    } else {
        x
    }
}

/// Binormal curve `Phi(a + b Phi^{-1}(p))`.
pub fn binormal_roc_oracle(a: f64, b: f64, grid: &PGrid) -> Result<RocCurve> {
    check_shift_scale(b, 1.0)?;
    Ok(RocCurve {
        grid: grid.clone(),
        values: grid
            .values()
            .iter()
            .map(|&p| std_normal_cdf(a + b * std_normal_quantile(p)))
            .collect(),
    })
}
