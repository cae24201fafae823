//! Nadaraya-Watson location-scale regression with least-squares
//! cross-validated bandwidths.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parallel::map_range;

/// Symmetric kernel density used for the regression weights.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelSpec {
    #[default]
    Gaussian,
}

impl KernelSpec {
    pub fn density(self, u: f64) -> f64 {
        match self {
            KernelSpec::Gaussian => (-0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt(),
        }
    }

    /// Kernel value up to the normalizing constant, which cancels in the weights.
    #[inline]
    fn unnormalized(self, u: f64) -> f64 {
        match self {
            KernelSpec::Gaussian => (-0.5 * u * u).exp(),
        }
    }
}

pub const LSCV_GRID_SIZE: usize = 30;
pub const LSCV_GRID_LOW: f64 = 0.05;
pub const LSCV_GRID_HIGH: f64 = 20.0;

fn check_bandwidth(g: f64) -> Result<()> {
    if g > 0.0 && g.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("bandwidth must be positive, got {g}")))
    }
}

/// Normalized kernel weights of every `xs[i]` at `x0`.
pub fn nw_weights(x0: f64, xs: &[f64], g: f64, kernel: KernelSpec) -> Result<Vec<f64>> {
    check_bandwidth(g)?;
    if xs.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut w: Vec<f64> = xs
        .iter()
        .map(|&xi| kernel.unnormalized((x0 - xi) / g))
        .collect();
    let total: f64 = w.iter().sum();
    if !(total > 0.0) {
        return Err(Error::BandwidthTooSmall {
            point: x0,
            bandwidth: g,
        });
    }
    for v in &mut w {
        *v /= total;
    }
    Ok(w)
}

/// Weighted mean anchored at the first response, so constant responses are
/// reproduced exactly.
#[inline]
fn anchored_mean(weights: &[f64], ys: &[f64]) -> f64 {
    let anchor = ys[0];
    anchor
        + weights
            .iter()
            .zip(ys)
            .map(|(w, y)| w * (y - anchor))
            .sum::<f64>()
}

#[inline]
fn weighted_sq_residual(weights: &[f64], ys: &[f64], fitted: &[f64]) -> f64 {
    weights
        .iter()
        .zip(ys.iter().zip(fitted))
        .map(|(w, (y, m))| w * (y - m) * (y - m))
        .sum()
}

/// Conditional-variance floor: `1e-8 * var(ys)`, or `1e-12` for constant responses.
pub fn variance_floor(ys: &[f64]) -> f64 {
    let n = ys.len();
    if n < 2 {
        return 1e-12;
    }
    let mean = ys.iter().sum::<f64>() / n as f64;
    let var = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    if var > 0.0 {
        1e-8 * var
    } else {
        1e-12
    }
}

fn check_xy(xs: &[f64], ys: &[f64]) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::EmptySample);
    }
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} covariate values but {} responses",
            xs.len(),
            ys.len()
        )));
    }
    Ok(())
}

/// Nadaraya-Watson estimate of the conditional mean at `x0`.
pub fn nw_regress(x0: f64, xs: &[f64], ys: &[f64], g: f64) -> Result<f64> {
    check_xy(xs, ys)?;
    let w = nw_weights(x0, xs, g, KernelSpec::Gaussian)?;
    Ok(anchored_mean(&w, ys))
}

/// Nadaraya-Watson estimate of the conditional variance at `x0`, floored at
/// [`variance_floor`].
pub fn nw_variance(x0: f64, xs: &[f64], ys: &[f64], fitted_at_data: &[f64], g: f64) -> Result<f64> {
    check_xy(xs, ys)?;
    if fitted_at_data.len() != ys.len() {
        return Err(Error::DimensionMismatch(
            "fitted values and responses differ in length".into(),
        ));
    }
    let w = nw_weights(x0, xs, g, KernelSpec::Gaussian)?;
    Ok(weighted_sq_residual(&w, ys, fitted_at_data).max(variance_floor(ys)))
}

/// Mean and standard deviation of a fitted model at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointEstimate {
    pub mean: f64,
    pub sd: f64,
    /// The variance estimate hit the floor.
    pub floored: bool,
}

/// Location-scale fit of one marker on one (scalar) covariate.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionFit {
    pub bandwidth: f64,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub fitted_means: Vec<f64>,
    pub fitted_sds: Vec<f64>,
    pub residuals: Vec<f64>,
    pub variance_floor: f64,
    /// Number of data points whose variance estimate was floored.
    pub floor_hits: usize,
}

impl RegressionFit {
    pub fn n(&self) -> usize {
        self.xs.len()
    }

    /// Evaluates the fitted mean and standard deviation at a new point.
    pub fn evaluate_at(&self, x0: f64) -> Result<PointEstimate> {
        let w = nw_weights(x0, &self.xs, self.bandwidth, KernelSpec::Gaussian)?;
        Ok(self.evaluate_with_weights(&w))
    }

    pub(crate) fn evaluate_with_weights(&self, w: &[f64]) -> PointEstimate {
        let mean = anchored_mean(w, &self.ys);
        let raw = weighted_sq_residual(w, &self.ys, &self.fitted_means);
        let floored = !(raw > self.variance_floor);
        PointEstimate {
            mean,
            sd: raw.max(self.variance_floor).sqrt(),
            floored,
        }
    }
}

/// Row-normalized kernel weights of a sample evaluated at its own points.
/// Self-weights are always positive, so rows never underflow.
#[derive(Debug, Clone)]
pub struct Smoother {
    bandwidth: f64,
    n: usize,
    weights: Vec<f64>,
}

fn kernel_row(x0: f64, xs: &[f64], g: f64) -> Vec<f64> {
    let mut row: Vec<f64> = xs
        .iter()
        .map(|&xi| KernelSpec::Gaussian.unnormalized((x0 - xi) / g))
        .collect();
    let total: f64 = row.iter().sum();
    for v in &mut row {
        *v /= total;
    }
    row
}

impl Smoother {
    pub fn new(xs: &[f64], g: f64) -> Result<Self> {
        check_bandwidth(g)?;
        if xs.is_empty() {
            return Err(Error::EmptySample);
        }
        let n = xs.len();
        let mut weights = Vec::with_capacity(n * n);
        for &x0 in xs {
            weights.extend(kernel_row(x0, xs, g));
        }
        Ok(Self {
            bandwidth: g,
            n,
            weights,
        })
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    /// Fits mean and variance at every data point for responses `ys`.
    pub fn fit(&self, xs: &[f64], ys: &[f64]) -> Result<RegressionFit> {
        check_xy(xs, ys)?;
        if ys.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "smoother built for {} points, got {}",
                self.n,
                ys.len()
            )));
        }
        let rows = self.weights.chunks_exact(self.n);
        let fitted_means: Vec<f64> = rows.clone().map(|w| anchored_mean(w, ys)).collect();
        let raw: Vec<f64> = rows
            .map(|w| weighted_sq_residual(w, ys, &fitted_means))
            .collect();
        Ok(assemble_fit(self.bandwidth, xs, ys, fitted_means, raw))
    }
}

fn assemble_fit(
    bandwidth: f64,
    xs: &[f64],
    ys: &[f64],
    fitted_means: Vec<f64>,
    raw_variances: Vec<f64>,
) -> RegressionFit {
    let floor = variance_floor(ys);
    let floor_hits = raw_variances.iter().filter(|&&v| !(v > floor)).count();
    let fitted_sds: Vec<f64> = raw_variances.iter().map(|v| v.max(floor).sqrt()).collect();
    let residuals = ys
        .iter()
        .zip(fitted_means.iter().zip(&fitted_sds))
        .map(|(y, (m, s))| (y - m) / s)
        .collect();
    RegressionFit {
        bandwidth,
        xs: xs.to_vec(),
        ys: ys.to_vec(),
        fitted_means,
        fitted_sds,
        residuals,
        variance_floor: floor,
        floor_hits,
    }
}

/// Fits the location-scale model `Y = mu(X) + sigma(X) * eps` with a common
/// bandwidth for mean and variance. Weight rows are computed on the fly, so
/// memory stays linear in `n`; results match [`Smoother::fit`] bitwise.
pub fn fit_location_scale(xs: &[f64], ys: &[f64], g: f64) -> Result<RegressionFit> {
    check_bandwidth(g)?;
    check_xy(xs, ys)?;
    let fitted_means: Vec<f64> = xs
        .iter()
        .map(|&x0| anchored_mean(&kernel_row(x0, xs, g), ys))
        .collect();
    let raw: Vec<f64> = xs
        .iter()
        .map(|&x0| weighted_sq_residual(&kernel_row(x0, xs, g), ys, &fitted_means))
        .collect();
    Ok(assemble_fit(g, xs, ys, fitted_means, raw))
}

/// Outcome of the cross-validation search.
#[derive(Debug, Clone, PartialEq)]
pub struct LscvSearch {
    pub bandwidth: f64,
    pub grid: Vec<f64>,
    /// Mean leave-one-out squared error per grid point; `None` when every
    /// point's leave-one-out neighbourhood underflowed.
    pub scores: Vec<Option<f64>>,
    /// Points skipped per grid bandwidth because their neighbourhood underflowed.
    pub skipped: Vec<usize>,
}

impl LscvSearch {
    /// Total skipped points at the selected bandwidth.
    pub fn skipped_at_selection(&self) -> usize {
        self.grid
            .iter()
            .position(|&g| g == self.bandwidth)
            .map_or(0, |i| self.skipped[i])
    }
}

fn sample_sd(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// The candidate bandwidths: log-spaced between 0.05 and 20 times the
/// rule-of-thumb `sd(xs) * n^(-1/5)`.
pub fn lscv_grid(xs: &[f64]) -> Result<Vec<f64>> {
    if xs.len() < 3 {
        return Err(Error::TooFewObservations {
            population: "cross-validation sample",
            n: xs.len(),
        });
    }
    let sd = sample_sd(xs);
    if !(sd > 0.0) {
        return Err(Error::DegenerateCovariate(
            "all covariate values are equal".into(),
        ));
    }
    let rot = sd * (xs.len() as f64).powf(-0.2);
    let (lo, hi) = ((LSCV_GRID_LOW * rot).ln(), (LSCV_GRID_HIGH * rot).ln());
    let step = (hi - lo) / (LSCV_GRID_SIZE - 1) as f64;
    Ok((0..LSCV_GRID_SIZE)
        .map(|i| (lo + step * i as f64).exp())
        .collect())
}

fn loo_score(xs: &[f64], ys: &[f64], g: f64) -> (Option<f64>, usize) {
    let n = xs.len();
    let anchor = ys[0];
    let mut num = vec![0.0; n];
    let mut den = vec![0.0; n];
    for i in 0..n {
        for l in (i + 1)..n {
            let k = KernelSpec::Gaussian.unnormalized((xs[i] - xs[l]) / g);
            num[i] += k * (ys[l] - anchor);
            den[i] += k;
            num[l] += k * (ys[i] - anchor);
            den[l] += k;
        }
    }
    let mut total = 0.0;
    let mut used = 0usize;
    for i in 0..n {
        if den[i] > 0.0 {
            let err = ys[i] - (anchor + num[i] / den[i]);
            total += err * err;
            used += 1;
        }
    }
    let skipped = n - used;
    if used == 0 {
        (None, skipped)
    } else {
        (Some(total / used as f64), skipped)
    }
}

/// Full least-squares cross-validation search. Ties (within a relative
/// 1e-12) go to the largest bandwidth.
pub fn lscv_search(xs: &[f64], ys: &[f64]) -> Result<LscvSearch> {
    check_xy(xs, ys)?;
    let grid = lscv_grid(xs)?;
    let evaluated = map_range(grid.len(), |i| loo_score(xs, ys, grid[i]));
    let scores: Vec<Option<f64>> = evaluated.iter().map(|e| e.0).collect();
    let skipped: Vec<usize> = evaluated.iter().map(|e| e.1).collect();
    let best = scores
        .iter()
        .flatten()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if !best.is_finite() {
        return Err(Error::AllBandwidthsFail);
    }
    let limit = best * (1.0 + 1e-12);
    let chosen = scores
        .iter()
        .rposition(|s| s.is_some_and(|v| v <= limit))
        .expect("a finite best score exists");
    Ok(LscvSearch {
        bandwidth: grid[chosen],
        grid,
        scores,
        skipped,
    })
}

pub fn lscv_bandwidth(xs: &[f64], ys: &[f64]) -> Result<f64> {
    lscv_search(xs, ys).map(|s| s.bandwidth)
}
