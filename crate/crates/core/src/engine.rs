//! Shared bootstrap machinery behind the one-dimensional and projected tests.
//!
//! A problem is a set of projected covariates per population (one per
//! direction) and a list of (diseased, healthy) direction index pairs. Fits
//! depend on a single population and direction, so they are computed once per
//! direction and shared by every pair using it, both on the original sample
//! and inside each bootstrap replicate.

use crate::error::{Error, Result};
use crate::kernel::{lscv_search, nw_weights, KernelSpec, PointEstimate, RegressionFit, Smoother};
use crate::matrix::Matrix;
use crate::parallel::map_range;
use crate::report::{BandwidthReport, Diagnostics};
use crate::rng::{domain, stream};
use crate::roc::{default_roc_bandwidth, pooled_bandwidth, smoothed_roc_sorted, PGrid};
use crate::univariate::{bootstrap_pvalue, draw_row_indices, BandwidthPolicy, PsiFunctional};

/// Replicate failures above this fraction abort the test.
pub const MAX_FAILED_FRACTION: f64 = 0.10;

pub(crate) struct Problem<'a> {
    pub f_covariates: Vec<Vec<f64>>,
    pub f_x: Vec<f64>,
    pub g_covariates: Vec<Vec<f64>>,
    pub g_x: Vec<f64>,
    pub pairs: Vec<(usize, usize)>,
    pub f_markers: &'a Matrix,
    pub g_markers: &'a Matrix,
}

pub(crate) struct EngineConfig<'a> {
    pub b: usize,
    pub grid: &'a PGrid,
    pub seed: u64,
    pub bandwidths: &'a BandwidthPolicy,
    pub h: Option<f64>,
}

struct MarkerModel {
    smoother: Smoother,
    fit: RegressionFit,
    weights_at_x: Vec<f64>,
    lscv_skipped: usize,
}

/// Fits of every marker of one population along one direction.
struct PopulationModel {
    covariate: Vec<f64>,
    markers: Vec<MarkerModel>,
    residuals: Matrix,
}

/// What the ROC estimator needs from one fitted marker.
struct MarkerSummary {
    sorted_residuals: Vec<f64>,
    at_x: PointEstimate,
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

impl PopulationModel {
    fn new(covariate: &[f64], markers: &Matrix, x0: f64, policy: &BandwidthPolicy) -> Result<Self> {
        let k = markers.ncols();
        let mut models = Vec::with_capacity(k);
        for j in 0..k {
            let ys = markers.column(j);
            let (g, skipped) = match policy {
                BandwidthPolicy::Lscv => {
                    let search = lscv_search(covariate, &ys)?;
                    (search.bandwidth, search.skipped_at_selection())
                }
                BandwidthPolicy::Fixed(g) => (*g, 0),
            };
            let smoother = Smoother::new(covariate, g)?;
            let fit = smoother.fit(covariate, &ys)?;
            let weights_at_x = nw_weights(x0, covariate, g, KernelSpec::Gaussian)?;
            models.push(MarkerModel {
                smoother,
                fit,
                weights_at_x,
                lscv_skipped: skipped,
            });
        }
        let residual_columns: Vec<&[f64]> = models.iter().map(|m| m.fit.residuals.as_slice()).collect();
        let residuals = Matrix::from_columns(&residual_columns)?;
        Ok(Self {
            covariate: covariate.to_vec(),
            markers: models,
            residuals,
        })
    }

    fn bandwidths(&self) -> Vec<f64> {
        self.markers.iter().map(|m| m.smoother.bandwidth()).collect()
    }

    fn summarize(fit: &RegressionFit, weights_at_x: &[f64]) -> MarkerSummary {
        MarkerSummary {
            sorted_residuals: sorted(fit.residuals.clone()),
            at_x: fit.evaluate_with_weights(weights_at_x),
        }
    }

    fn summaries(&self) -> Vec<MarkerSummary> {
        self.markers
            .iter()
            .map(|m| Self::summarize(&m.fit, &m.weights_at_x))
            .collect()
    }

    /// Rebuilds every marker from the residual rows `rows` (shared across
    /// markers, preserving their dependence) and re-fits with the frozen
    /// bandwidths.
    fn bootstrap(&self, rows: &[usize]) -> Result<Vec<MarkerSummary>> {
        let n = self.covariate.len();
        let mut out = Vec::with_capacity(self.markers.len());
        let mut ys = vec![0.0; n];
        for (k, m) in self.markers.iter().enumerate() {
            for (i, y) in ys.iter_mut().enumerate() {
                *y = m.fit.fitted_means[i] + m.fit.fitted_sds[i] * self.residuals.get(rows[i], k);
            }
            let fit = m.smoother.fit(&self.covariate, &ys)?;
            let summary = Self::summarize(&fit, &m.weights_at_x);
            if !summary.at_x.mean.is_finite()
                || !summary.at_x.sd.is_finite()
                || summary.sorted_residuals.iter().any(|r| !r.is_finite())
            {
                return Err(Error::NonFiniteValue("bootstrap fit".into()));
            }
            out.push(summary);
        }
        Ok(out)
    }
}

/// Per-pair constants of the statistic: `sqrt(n g_k)` and normalized
/// weights `g_k / sum g`.
struct PairWeights {
    pooled: Vec<f64>,
    scale: Vec<f64>,
    weights: Vec<f64>,
}

impl PairWeights {
    fn new(g_f: &[f64], g_g: &[f64], n_f: usize, n_g: usize) -> Self {
        let pooled: Vec<f64> = g_f
            .iter()
            .zip(g_g)
            .map(|(&a, &b)| pooled_bandwidth(a, b, n_f, n_g))
            .collect();
        let n = (n_f + n_g) as f64;
        let total: f64 = pooled.iter().sum();
        Self {
            scale: pooled.iter().map(|g| (n * g).sqrt()).collect(),
            weights: pooled.iter().map(|g| g / total).collect(),
            pooled,
        }
    }

    /// `sqrt(n g_k) * sum_j w_j (c_k - c_j)` for every marker `k`: the
    /// deviation from the weighted average in S, and (applied to bootstrap
    /// minus original curves) the alpha-matrix combination in T. Written as
    /// pairwise differences so that equal inputs give exact zeros.
    fn deviations(&self, curves: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let m = curves[0].len();
        curves
            .iter()
            .enumerate()
            .map(|(k, ck)| {
                (0..m)
                    .map(|i| {
                        let centered: f64 = curves
                            .iter()
                            .zip(&self.weights)
                            .map(|(cj, w)| w * (ck[i] - cj[i]))
                            .sum();
                        self.scale[k] * centered
                    })
                    .collect()
            })
            .collect()
    }
}

fn statistics(devs: &[Vec<f64>], grid: &PGrid, psis: &[PsiFunctional]) -> Vec<f64> {
    psis.iter()
        .map(|psi| devs.iter().map(|d| psi.apply(grid.values(), d)).sum())
        .collect()
}

struct PairCurves {
    values: Vec<Vec<f64>>,
    floored: usize,
}

fn pair_curves(f: &[MarkerSummary], g: &[MarkerSummary], h: f64, grid: &PGrid) -> Result<PairCurves> {
    let mut floored = 0;
    let mut values = Vec::with_capacity(f.len());
    for (mf, mg) in f.iter().zip(g) {
        let a = (mf.at_x.mean - mg.at_x.mean) / mf.at_x.sd;
        let b = mg.at_x.sd / mf.at_x.sd;
        if !(a.is_finite() && b.is_finite() && b > 0.0) {
            return Err(Error::NonFiniteValue("location-scale shift".into()));
        }
        floored += usize::from(mf.at_x.floored) + usize::from(mg.at_x.floored);
        values.push(smoothed_roc_sorted(&mf.sorted_residuals, &mg.sorted_residuals, a, b, h, grid));
    }
    Ok(PairCurves { values, floored })
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    sum / count as f64
}

/// Fits and curves of the original sample.
pub(crate) struct Prepared<'a> {
    problem: Problem<'a>,
    f_models: Vec<PopulationModel>,
    g_models: Vec<PopulationModel>,
    pair_weights: Vec<PairWeights>,
    original: Vec<PairCurves>,
    h: f64,
}

pub(crate) struct Observed {
    /// `[psi][pair]`
    pub pair_statistics: Vec<Vec<f64>>,
    /// `[psi]`, averaged over pairs.
    pub statistic: Vec<f64>,
}

pub(crate) struct Outcome {
    pub observed: Observed,
    /// `[psi]`: aggregated bootstrap statistics of the successful replicates.
    pub bootstrap: Vec<Vec<f64>>,
    pub p_values: Vec<f64>,
    pub b_effective: usize,
    pub bandwidths: BandwidthReport,
    pub diagnostics: Diagnostics,
}

impl<'a> Prepared<'a> {
    pub fn new(problem: Problem<'a>, config: &EngineConfig<'_>) -> Result<Self> {
        let k = problem.f_markers.ncols();
        if k != problem.g_markers.ncols() {
            return Err(Error::DimensionMismatch("marker counts differ between populations".into()));
        }
        if k < 2 {
            return Err(Error::UnsupportedK(k));
        }
        if problem.pairs.is_empty() {
            return Err(Error::EmptyAggregation);
        }
        let n_f = problem.f_markers.nrows();
        let n_g = problem.g_markers.nrows();
        let h = config.h.unwrap_or_else(|| default_roc_bandwidth(n_f + n_g));
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidConfig(format!("smoothing bandwidth must be positive, got {h}")));
        }
        let f_models: Vec<PopulationModel> = map_range(problem.f_covariates.len(), |r| {
            PopulationModel::new(&problem.f_covariates[r], problem.f_markers, problem.f_x[r], config.bandwidths)
        })
        .into_iter()
        .collect::<Result<_>>()?;
        let g_models: Vec<PopulationModel> = map_range(problem.g_covariates.len(), |l| {
            PopulationModel::new(&problem.g_covariates[l], problem.g_markers, problem.g_x[l], config.bandwidths)
        })
        .into_iter()
        .collect::<Result<_>>()?;
        let f_summaries: Vec<Vec<MarkerSummary>> = f_models.iter().map(|m| m.summaries()).collect();
        let g_summaries: Vec<Vec<MarkerSummary>> = g_models.iter().map(|m| m.summaries()).collect();
        let mut pair_weights = Vec::with_capacity(problem.pairs.len());
        let mut original = Vec::with_capacity(problem.pairs.len());
        for &(r, l) in &problem.pairs {
            pair_weights.push(PairWeights::new(
                &f_models[r].bandwidths(),
                &g_models[l].bandwidths(),
                n_f,
                n_g,
            ));
            original.push(pair_curves(&f_summaries[r], &g_summaries[l], h, config.grid)?);
        }
        Ok(Self {
            problem,
            f_models,
            g_models,
            pair_weights,
            original,
            h,
        })
    }

    pub fn observed(&self, grid: &PGrid, psis: &[PsiFunctional]) -> Observed {
        let per_pair: Vec<Vec<f64>> = self
            .original
            .iter()
            .zip(&self.pair_weights)
            .map(|(c, w)| statistics(&w.deviations(&c.values), grid, psis))
            .collect();
        let pair_statistics: Vec<Vec<f64>> = (0..psis.len())
            .map(|s| per_pair.iter().map(|p| p[s]).collect())
            .collect();
        let statistic = pair_statistics.iter().map(|v| mean(v.iter().copied())).collect();
        Observed {
            pair_statistics,
            statistic,
        }
    }

    /// Bootstrap statistics of replicate `b`, averaged over pairs.
    fn replicate(&self, b: usize, config: &EngineConfig<'_>, psis: &[PsiFunctional]) -> Result<Vec<f64>> {
        let n_f = self.problem.f_markers.nrows();
        let n_g = self.problem.g_markers.nrows();
        let rows_f = draw_row_indices(n_f, &mut stream(config.seed, domain::RESAMPLE_DISEASED, b as u64));
        let rows_g = draw_row_indices(n_g, &mut stream(config.seed, domain::RESAMPLE_HEALTHY, b as u64));
        let boot_f: Vec<Vec<MarkerSummary>> = self
            .f_models
            .iter()
            .map(|m| m.bootstrap(&rows_f))
            .collect::<Result<_>>()?;
        let boot_g: Vec<Vec<MarkerSummary>> = self
            .g_models
            .iter()
            .map(|m| m.bootstrap(&rows_g))
            .collect::<Result<_>>()?;
        let mut totals = vec![0.0; psis.len()];
        for (p, &(r, l)) in self.problem.pairs.iter().enumerate() {
            let boot = pair_curves(&boot_f[r], &boot_g[l], self.h, config.grid)?;
            let delta: Vec<Vec<f64>> = boot
                .values
                .iter()
                .zip(&self.original[p].values)
                .map(|(bc, oc)| bc.iter().zip(oc).map(|(x, y)| x - y).collect())
                .collect();
            let stats = statistics(&self.pair_weights[p].deviations(&delta), config.grid, psis);
            for (t, s) in totals.iter_mut().zip(stats) {
                *t += s;
            }
        }
        let count = self.problem.pairs.len() as f64;
        Ok(totals.into_iter().map(|t| t / count).collect())
    }

    fn bandwidth_report(&self) -> BandwidthReport {
        BandwidthReport {
            diseased: self.f_models.iter().map(|m| m.bandwidths()).collect(),
            healthy: self.g_models.iter().map(|m| m.bandwidths()).collect(),
            pooled: self.pair_weights.iter().map(|w| w.pooled.clone()).collect(),
            smoothing: self.h,
        }
    }

    pub fn run(&self, config: &EngineConfig<'_>, psis: &[PsiFunctional]) -> Result<Outcome> {
        if config.b == 0 {
            return Err(Error::InvalidConfig("bootstrap count must be positive".into()));
        }
        let observed = self.observed(config.grid, psis);
        let replicates = map_range(config.b, |b| self.replicate(b, config, psis).ok());
        let failed = replicates.iter().filter(|r| r.is_none()).count();
        if failed == config.b || failed as f64 > MAX_FAILED_FRACTION * config.b as f64 {
            return Err(Error::BootstrapDegenerate {
                failed,
                requested: config.b,
            });
        }
        let ok: Vec<Vec<f64>> = replicates.into_iter().flatten().collect();
        let bootstrap: Vec<Vec<f64>> = (0..psis.len())
            .map(|s| ok.iter().map(|r| r[s]).collect())
            .collect();
        let p_values = observed
            .statistic
            .iter()
            .zip(&bootstrap)
            .map(|(&s, t)| bootstrap_pvalue(s, t))
            .collect();
        let floored = self.original.iter().map(|c| c.floored).sum();
        let lscv_skipped = self
            .f_models
            .iter()
            .chain(&self.g_models)
            .flat_map(|m| m.markers.iter().map(|mm| mm.lscv_skipped))
            .sum();
        Ok(Outcome {
            observed,
            bootstrap,
            p_values,
            b_effective: ok.len(),
            bandwidths: self.bandwidth_report(),
            diagnostics: Diagnostics {
                failed_replicates: failed,
                floored_sd_at_x: floored,
                lscv_skipped_points: lscv_skipped,
                experimental: false,
            },
        })
    }
}
