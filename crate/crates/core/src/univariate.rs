//! Comparison of K dependent conditional ROC curves at a fixed pair of
//! scalar conditioning values.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{EngineConfig, Outcome, Prepared, Problem};
use crate::error::{Error, Result};
use crate::kernel::RegressionFit;
use crate::matrix::Matrix;
use crate::report::TestReport;
use crate::roc::{weighted_average_curve, PGrid, RocCurve};

/// Distance functional applied to each centered curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PsiFunctional {
    /// Trapezoidal integral of the squared function over the grid.
    L2,
    /// Maximum absolute value on the grid.
    Ks,
}

impl PsiFunctional {
    pub const ALL: [PsiFunctional; 2] = [PsiFunctional::L2, PsiFunctional::Ks];

    pub(crate) fn apply(self, grid: &[f64], f: &[f64]) -> f64 {
        match self {
            PsiFunctional::L2 => grid
                .windows(2)
                .zip(f.windows(2))
                .map(|(p, v)| 0.5 * (p[1] - p[0]) * (v[0] * v[0] + v[1] * v[1]))
                .sum(),
            PsiFunctional::Ks => f.iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }
}

impl fmt::Display for PsiFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PsiFunctional::L2 => "l2",
            PsiFunctional::Ks => "ks",
        })
    }
}

impl FromStr for PsiFunctional {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l2" => Ok(PsiFunctional::L2),
            "ks" => Ok(PsiFunctional::Ks),
            _ => Err(Error::InvalidConfig(format!("unknown psi functional `{s}` (expected l2 or ks)"))),
        }
    }
}

pub fn psi_apply(psi: PsiFunctional, grid: &PGrid, f: &[f64]) -> Result<f64> {
    if grid.len() != f.len() {
        return Err(Error::GridMismatch);
    }
    Ok(psi.apply(grid.values(), f))
}

/// `alpha[k][j] = I(k = j) - sqrt(g_k g_j) / sum g`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaMatrix {
    k: usize,
    entries: Vec<f64>,
}

impl AlphaMatrix {
    pub fn new(g: &[f64]) -> Result<Self> {
        if g.is_empty() {
            return Err(Error::EmptyAggregation);
        }
        if g.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidConfig("bandwidths must be positive".into()));
        }
        let k = g.len();
        let total: f64 = g.iter().sum();
        let mut entries = Vec::with_capacity(k * k);
        for a in 0..k {
            for b in 0..k {
                let delta = if a == b { 1.0 } else { 0.0 };
                entries.push(delta - (g[a] * g[b]).sqrt() / total);
            }
        }
        Ok(Self { k, entries })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, k: usize, j: usize) -> f64 {
        self.entries[k * self.k + j]
    }
}

fn check_curves(curves: &[RocCurve], g: &[f64]) -> Result<()> {
    let first = curves.first().ok_or(Error::EmptyAggregation)?;
    if curves.len() != g.len() {
        return Err(Error::DimensionMismatch("one bandwidth per curve is required".into()));
    }
    if curves.iter().any(|c| c.grid != first.grid) {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// `sum_k psi(sqrt(n g_k) (ROC_k - ROC_avg))` with the average weighted by `g`.
pub fn statistic_from_curves(curves: &[RocCurve], g: &[f64], n_total: usize, psi: PsiFunctional) -> Result<f64> {
    check_curves(curves, g)?;
    let average = weighted_average_curve(curves, g)?;
    let n = n_total as f64;
    let mut s = 0.0;
    for (curve, &gk) in curves.iter().zip(g) {
        let scale = (n * gk).sqrt();
        let dev: Vec<f64> = curve
            .values
            .iter()
            .zip(&average.values)
            .map(|(c, m)| scale * (c - m))
            .collect();
        s += psi.apply(curve.grid.values(), &dev);
    }
    Ok(s)
}

/// `sum_k psi(sum_j sqrt(n g_j) alpha_kj (ROC*_j - ROC_j))`.
pub fn statistic_t_boot(
    bootstrap: &[RocCurve],
    original: &[RocCurve],
    alpha: &AlphaMatrix,
    g: &[f64],
    n_total: usize,
    psi: PsiFunctional,
) -> Result<f64> {
    check_curves(bootstrap, g)?;
    check_curves(original, g)?;
    if alpha.k() != g.len() {
        return Err(Error::DimensionMismatch("alpha matrix size differs from marker count".into()));
    }
    if bootstrap[0].grid != original[0].grid {
        return Err(Error::GridMismatch);
    }
    let n = n_total as f64;
    let m = original[0].grid.len();
    let mut t = 0.0;
    for k in 0..g.len() {
        let dev: Vec<f64> = (0..m)
            .map(|i| {
                (0..g.len())
                    .map(|j| {
                        (n * g[j]).sqrt() * alpha.get(k, j) * (bootstrap[j].values[i] - original[j].values[i])
                    })
                    .sum()
            })
            .collect();
        t += psi.apply(original[0].grid.values(), &dev);
    }
    Ok(t)
}

/// `n` row indices drawn uniformly with replacement.
pub fn draw_row_indices<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

/// Resamples whole rows so that the dependence between markers is kept.
pub fn resample_residual_vectors<R: Rng + ?Sized>(residuals: &Matrix, rng: &mut R) -> Matrix {
    residuals.select_rows(&draw_row_indices(residuals.nrows(), rng))
}

/// `Y*[i][k] = mu_k(X_i) + sigma_k(X_i) eps*[i][k]`.
pub fn reconstruct_bootstrap_markers(fits: &[RegressionFit], residuals: &Matrix) -> Result<Matrix> {
    if fits.len() != residuals.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "{} fits for {} residual columns",
            fits.len(),
            residuals.ncols()
        )));
    }
    if fits.iter().any(|f| f.n() != residuals.nrows()) {
        return Err(Error::DimensionMismatch("fit sample size differs from residual rows".into()));
    }
    let mut out = Matrix::zeros(residuals.nrows(), residuals.ncols());
    for (k, fit) in fits.iter().enumerate() {
        for i in 0..residuals.nrows() {
            out.set(i, k, fit.fitted_means[i] + fit.fitted_sds[i] * residuals.get(i, k));
        }
    }
    Ok(out)
}

/// Fraction of bootstrap statistics at least as large as `s`.
pub fn bootstrap_pvalue(s: f64, bootstrap: &[f64]) -> f64 {
    let hits = bootstrap.iter().filter(|&&t| s <= t).count();
    hits as f64 / bootstrap.len() as f64
}

/// How regression bandwidths are chosen on the original sample.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BandwidthPolicy {
    /// Least-squares cross-validation, per population and marker.
    #[default]
    Lscv,
    /// One bandwidth for every population and marker.
    Fixed(f64),
}

/// One population observed on a scalar covariate.
#[derive(Debug, Clone, Copy)]
pub struct UniSample<'a> {
    pub covariate: &'a [f64],
    pub markers: &'a Matrix,
}

#[derive(Debug, Clone, Copy)]
pub struct UniTestInputs<'a> {
    pub diseased: UniSample<'a>,
    pub healthy: UniSample<'a>,
    pub x_f: f64,
    pub x_g: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniTestConfig {
    pub psi: PsiFunctional,
    pub b: usize,
    pub grid: PGrid,
    pub seed: u64,
    pub bandwidths: BandwidthPolicy,
    /// ROC smoothing bandwidth; `1 / sqrt(nF + nG)` when unset.
    pub h: Option<f64>,
}

impl Default for UniTestConfig {
    fn default() -> Self {
        Self {
            psi: PsiFunctional::L2,
            b: 200,
            grid: PGrid::default(),
            seed: 0,
            bandwidths: BandwidthPolicy::Lscv,
            h: None,
        }
    }
}

impl UniTestConfig {
    pub(crate) fn engine(&self) -> Result<EngineConfig<'_>> {
        if let BandwidthPolicy::Fixed(g) = self.bandwidths {
            if !(g > 0.0 && g.is_finite()) {
                return Err(Error::InvalidConfig(format!("fixed bandwidth must be positive, got {g}")));
            }
        }
        Ok(EngineConfig {
            b: self.b,
            grid: &self.grid,
            seed: self.seed,
            bandwidths: &self.bandwidths,
            h: self.h,
        })
    }
}

fn check_sample(sample: &UniSample<'_>, label: &'static str) -> Result<()> {
    if sample.covariate.len() != sample.markers.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "{label}: {} covariate values for {} marker rows",
            sample.covariate.len(),
            sample.markers.nrows()
        )));
    }
    if sample.covariate.len() < 3 {
        return Err(Error::TooFewObservations {
            population: label,
            n: sample.covariate.len(),
        });
    }
    if sample.covariate.iter().any(|v| !v.is_finite()) || !sample.markers.all_finite() {
        return Err(Error::NonFiniteValue(format!("{label} sample")));
    }
    Ok(())
}

impl<'a> UniTestInputs<'a> {
    fn problem(&self) -> Result<Problem<'a>> {
        check_sample(&self.diseased, "diseased")?;
        check_sample(&self.healthy, "healthy")?;
        if !(self.x_f.is_finite() && self.x_g.is_finite()) {
            return Err(Error::NonFiniteValue("conditioning value".into()));
        }
        Ok(Problem {
            f_covariates: vec![self.diseased.covariate.to_vec()],
            f_x: vec![self.x_f],
            g_covariates: vec![self.healthy.covariate.to_vec()],
            g_x: vec![self.x_g],
            pairs: vec![(0, 0)],
            f_markers: self.diseased.markers,
            g_markers: self.healthy.markers,
        })
    }
}

/// Observed statistic only, without bootstrap.
pub fn statistic_s(inputs: &UniTestInputs<'_>, config: &UniTestConfig) -> Result<f64> {
    let engine = config.engine()?;
    let prepared = Prepared::new(inputs.problem()?, &engine)?;
    Ok(prepared.observed(&config.grid, &[config.psi]).statistic[0])
}

pub fn test_1d(inputs: &UniTestInputs<'_>, config: &UniTestConfig) -> Result<TestReport> {
    Ok(test_1d_with(inputs, config, &[config.psi])?.remove(0))
}

/// Runs the bootstrap once and reports every functional in `psis` from the
/// same replicates. `config.psi` is ignored.
pub fn test_1d_with(
    inputs: &UniTestInputs<'_>,
    config: &UniTestConfig,
    psis: &[PsiFunctional],
) -> Result<Vec<TestReport>> {
    let engine = config.engine()?;
    let prepared = Prepared::new(inputs.problem()?, &engine)?;
    let outcome = prepared.run(&engine, psis)?;
    Ok(reports(outcome, psis, config.seed, config.b))
}

pub(crate) fn reports(outcome: Outcome, psis: &[PsiFunctional], seed: u64, b: usize) -> Vec<TestReport> {
    psis.iter()
        .enumerate()
        .map(|(s, &psi)| TestReport {
            statistic: outcome.observed.statistic[s],
            p_value: outcome.p_values[s],
            b_effective: outcome.b_effective,
            psi,
            bandwidths: outcome.bandwidths.clone(),
            seed,
            bootstrap_stats: outcome.bootstrap[s].clone(),
            b_requested: b,
            mode: None,
            directions: Vec::new(),
            pair_statistics: outcome.observed.pair_statistics[s].clone(),
            standardization: None,
            diagnostics: outcome.diagnostics.clone(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal, Uniform};

    fn grid() -> PGrid {
        PGrid::default()
    }

    fn curve(values: Vec<f64>) -> RocCurve {
        RocCurve::new(grid(), values).unwrap()
    }

    #[test]
    fn psi_of_zero_is_zero() {
        let z = vec![0.0; 101];
        for psi in PsiFunctional::ALL {
            assert_eq!(psi_apply(psi, &grid(), &z).unwrap(), 0.0);
        }
    }

    #[test]
    fn psi_of_constant_two() {
        let f = vec![2.0; 101];
        assert_eq!(psi_apply(PsiFunctional::Ks, &grid(), &f).unwrap(), 2.0);
        let l2 = psi_apply(PsiFunctional::L2, &grid(), &f).unwrap();
        assert!((l2 - 4.0 * 100.0 / 102.0).abs() < 1e-12);
    }

    #[test]
    fn psi_l2_of_identity_uses_trapezoid() {
        let g = grid();
        let f = g.values().to_vec();
        let l2 = psi_apply(PsiFunctional::L2, &g, &f).unwrap();
        // Exact trapezoid of p^2 from 1/102 to 101/102 with step 1/102.
        let step: f64 = 1.0 / 102.0;
        let (lo, hi) = (step, 101.0 * step);
        let exact = (hi.powi(3) - lo.powi(3)) / 3.0 + 100.0 * step.powi(3) / 6.0;
        assert!((l2 - exact).abs() < 1e-12);
    }

    #[test]
    fn psi_rejects_mismatched_length() {
        assert!(matches!(
            psi_apply(PsiFunctional::L2, &grid(), &[0.0; 5]),
            Err(Error::GridMismatch)
        ));
    }

    #[test]
    fn psi_parses_and_prints() {
        for psi in PsiFunctional::ALL {
            assert_eq!(psi.to_string().parse::<PsiFunctional>().unwrap(), psi);
        }
        assert!("l1".parse::<PsiFunctional>().is_err());
    }

    #[test]
    fn alpha_centering() {
        let g = [0.1, 0.37, 0.02, 1.5];
        let alpha = AlphaMatrix::new(&g).unwrap();
        for j in 0..4 {
            let s: f64 = (0..4).map(|k| g[k].sqrt() * alpha.get(k, j)).sum();
            assert!(s.abs() < 1e-12);
        }
    }

    fn base_curve(shift: f64) -> Vec<f64> {
        grid().values().iter().map(|p| (p.sqrt() * 0.8 + shift).clamp(0.0, 1.0)).collect()
    }

    #[test]
    fn s_vanishes_for_identical_curves() {
        let c = curve(base_curve(0.0));
        let s = statistic_from_curves(&[c.clone(), c], &[0.2, 0.2], 200, PsiFunctional::L2).unwrap();
        assert_eq!(s, 0.0);
    }

    #[test]
    fn s_with_constant_gap_under_ks() {
        let c1: Vec<f64> = grid().values().iter().map(|p| 0.5 * p).collect();
        let c2: Vec<f64> = c1.iter().map(|v| v + 0.1).collect();
        let g = 0.3;
        let n = 200;
        let s = statistic_from_curves(&[curve(c1), curve(c2)], &[g, g], n, PsiFunctional::Ks).unwrap();
        let expected = 2.0 * (n as f64 * g).sqrt() * 0.05;
        assert!((s - expected).abs() < 1e-12);
    }

    #[test]
    fn s_nonnegative_for_three_curves() {
        let curves: Vec<RocCurve> = [0.0, 0.05, -0.1].iter().map(|&d| curve(base_curve(d))).collect();
        for psi in PsiFunctional::ALL {
            let s = statistic_from_curves(&curves, &[0.1, 0.2, 0.4], 150, psi).unwrap();
            assert!(s >= 0.0);
        }
    }

    #[test]
    fn weighted_deviations_sum_to_zero() {
        let curves: Vec<RocCurve> = [0.0, 0.05, -0.1].iter().map(|&d| curve(base_curve(d))).collect();
        let g = [0.1, 0.2, 0.4];
        let avg = weighted_average_curve(&curves, &g).unwrap();
        for i in 0..grid().len() {
            let s: f64 = curves.iter().zip(&g).map(|(c, gk)| gk * (c.values[i] - avg.values[i])).sum();
            assert!(s.abs() < 1e-10);
        }
    }

    #[test]
    fn t_vanishes_for_unchanged_curves() {
        let curves: Vec<RocCurve> = [0.0, 0.05].iter().map(|&d| curve(base_curve(d))).collect();
        let g = [0.1, 0.3];
        let alpha = AlphaMatrix::new(&g).unwrap();
        let t = statistic_t_boot(&curves, &curves, &alpha, &g, 100, PsiFunctional::L2).unwrap();
        assert_eq!(t, 0.0);
    }

    #[test]
    fn t_annihilates_common_shift_with_equal_bandwidths() {
        let orig: Vec<RocCurve> = [0.0, 0.1].iter().map(|&d| curve(base_curve(d))).collect();
        let boot: Vec<RocCurve> = orig
            .iter()
            .map(|c| curve(c.values.iter().enumerate().map(|(i, v)| v * 0.9 + 0.001 * (i % 7) as f64).collect()))
            .collect();
        // Same deviation for both markers.
        let delta: Vec<f64> = boot[0].values.iter().zip(&orig[0].values).map(|(b, o)| b - o).collect();
        let boot = vec![
            curve(orig[0].values.iter().zip(&delta).map(|(o, d)| o + d).collect()),
            curve(orig[1].values.iter().zip(&delta).map(|(o, d)| (o + d).clamp(0.0, 1.0)).collect()),
        ];
        let g = [0.25, 0.25];
        let alpha = AlphaMatrix::new(&g).unwrap();
        let t = statistic_t_boot(&boot, &orig, &alpha, &g, 300, PsiFunctional::Ks).unwrap();
        let max_clamp: f64 = orig[1]
            .values
            .iter()
            .zip(&delta)
            .map(|(o, d)| ((o + d) - (o + d).clamp(0.0, 1.0)).abs())
            .fold(0.0, f64::max);
        assert!(t <= 2.0 * (300.0f64 * 0.25).sqrt() * max_clamp + 1e-12, "{t}");
    }

    #[test]
    fn alpha_form_matches_pairwise_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let unif = Uniform::new(0.0, 1.0).unwrap();
        for _ in 0..20 {
            let k = 3;
            let g: Vec<f64> = (0..k).map(|_| 0.05 + unif.sample(&mut rng)).collect();
            let orig: Vec<RocCurve> = (0..k)
                .map(|_| curve((0..101).map(|_| unif.sample(&mut rng)).collect()))
                .collect();
            let boot: Vec<RocCurve> = (0..k)
                .map(|_| curve((0..101).map(|_| unif.sample(&mut rng)).collect()))
                .collect();
            let alpha = AlphaMatrix::new(&g).unwrap();
            let n = 250;
            let total: f64 = g.iter().sum();
            for psi in PsiFunctional::ALL {
                let t = statistic_t_boot(&boot, &orig, &alpha, &g, n, psi).unwrap();
                let mut pairwise = 0.0;
                for a in 0..k {
                    let dev: Vec<f64> = (0..101)
                        .map(|i| {
                            let da = boot[a].values[i] - orig[a].values[i];
                            let c: f64 = (0..k)
                                .map(|j| g[j] / total * (da - (boot[j].values[i] - orig[j].values[i])))
                                .sum();
                            (n as f64 * g[a]).sqrt() * c
                        })
                        .collect();
                    pairwise += psi.apply(grid().values(), &dev);
                }
                assert!((t - pairwise).abs() < 1e-12 * t.max(1.0), "{t} vs {pairwise}");
            }
        }
    }

    #[test]
    fn resampling_single_row() {
        let m = Matrix::from_rows(&[vec![1.5, -2.0]]).unwrap();
        let r = resample_residual_vectors(&m, &mut stream(1, 9, 0));
        assert_eq!(r, m);
    }

    #[test]
    fn resampling_keeps_rows_intact() {
        let col: Vec<f64> = (0..30).map(|i| (i as f64).sin()).collect();
        let m = Matrix::from_columns(&[col.clone(), col]).unwrap();
        for b in 0..50 {
            let r = resample_residual_vectors(&m, &mut stream(1, 9, b));
            assert_eq!(r.column(0), r.column(1));
        }
    }

    #[test]
    fn resampled_means_match_original() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 20;
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                vec![z, 2.0 * z + 1.0]
            })
            .collect();
        let m = Matrix::from_rows(&rows).unwrap();
        let draws = 10_000;
        for k in 0..2 {
            let col = m.column(k);
            let mean = col.iter().sum::<f64>() / n as f64;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
            let mut acc = 0.0;
            for b in 0..draws {
                let r = resample_residual_vectors(&m, &mut stream(1, 9, b));
                acc += r.column(k).iter().sum::<f64>() / n as f64;
            }
            let se = (var / n as f64 / draws as f64).sqrt();
            assert!((acc / draws as f64 - mean).abs() < 3.0 * se);
        }
    }

    fn manual_fit(means: Vec<f64>, sds: Vec<f64>, residuals: Vec<f64>) -> RegressionFit {
        let n = means.len();
        RegressionFit {
            bandwidth: 1.0,
            xs: vec![0.0; n],
            ys: means.iter().zip(&sds).zip(&residuals).map(|((m, s), e)| m + s * e).collect(),
            fitted_means: means,
            fitted_sds: sds,
            residuals,
            variance_floor: 1e-12,
            floor_hits: 0,
        }
    }

    #[test]
    fn reconstruct_identity_resample() {
        let xs: Vec<f64> = (0..40).map(|i| i as f64 / 40.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (3.0 * x).sin() + 0.1 * (17.0 * x).cos()).collect();
        let fit = crate::kernel::fit_location_scale(&xs, &ys, 0.1).unwrap();
        let eps = Matrix::from_columns(std::slice::from_ref(&fit.residuals)).unwrap();
        let y = reconstruct_bootstrap_markers(std::slice::from_ref(&fit), &eps).unwrap();
        for (a, b) in y.column(0).iter().zip(&ys) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn reconstruct_with_standard_fit_returns_residuals() {
        let fit = manual_fit(vec![0.0; 3], vec![1.0; 3], vec![0.0; 3]);
        let eps = Matrix::from_columns(&[vec![0.3, -1.0, 2.0]]).unwrap();
        let y = reconstruct_bootstrap_markers(&[fit], &eps).unwrap();
        assert_eq!(y, eps);
    }

    #[test]
    fn reconstruct_arithmetic() {
        let fit = manual_fit(vec![5.0], vec![2.0], vec![0.0]);
        let eps = Matrix::from_rows(&[vec![1.0, -1.0]]).unwrap();
        let y = reconstruct_bootstrap_markers(&[fit.clone(), fit], &eps).unwrap();
        assert_eq!(y.row(0), &[7.0, 3.0]);
    }

    #[test]
    fn reconstruct_rejects_mismatch() {
        let fit = manual_fit(vec![5.0, 1.0], vec![2.0, 1.0], vec![0.0, 0.0]);
        let eps = Matrix::from_rows(&[vec![1.0]]).unwrap();
        assert!(matches!(
            reconstruct_bootstrap_markers(&[fit], &eps),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn pvalue_counts_ties() {
        assert_eq!(bootstrap_pvalue(1.0, &[0.5, 0.9]), 0.0);
        assert_eq!(bootstrap_pvalue(0.0, &[0.0, 0.0, 0.0]), 1.0);
        assert_eq!(bootstrap_pvalue(0.5, &[0.5, 0.1, 0.7, 0.2]), 0.5);
    }

    struct Data {
        xf: Vec<f64>,
        yf: Matrix,
        xg: Vec<f64>,
        yg: Matrix,
    }

    fn simulated(seed: u64, n: usize, identical: bool) -> Data {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let unif = Uniform::new(0.0, 1.0).unwrap();
        let mut make = |shift: f64| {
            let x: Vec<f64> = (0..n).map(|_| unif.sample(&mut rng)).collect();
            let rows: Vec<Vec<f64>> = x
                .iter()
                .map(|&xi| {
                    let z1: f64 = StandardNormal.sample(&mut rng);
                    let z2: f64 = StandardNormal.sample(&mut rng);
                    let m = shift + (xi * 1.5).sin();
                    let s = 0.5 + 0.5 * xi;
                    if identical {
                        vec![m + s * z1, m + s * z1]
                    } else {
                        vec![m + s * z1, m + s * z2]
                    }
                })
                .collect();
            (x, Matrix::from_rows(&rows).unwrap())
        };
        let (xf, yf) = make(0.8);
        let (xg, yg) = make(0.0);
        Data { xf, yf, xg, yg }
    }

    impl Data {
        fn inputs(&self) -> UniTestInputs<'_> {
            UniTestInputs {
                diseased: UniSample {
                    covariate: &self.xf,
                    markers: &self.yf,
                },
                healthy: UniSample {
                    covariate: &self.xg,
                    markers: &self.yg,
                },
                x_f: 0.5,
                x_g: 0.5,
            }
        }
    }

    #[test]
    fn degenerate_identical_markers() {
        let data = simulated(1, 60, true);
        let config = UniTestConfig {
            b: 30,
            bandwidths: BandwidthPolicy::Fixed(0.15),
            ..UniTestConfig::default()
        };
        for psi in PsiFunctional::ALL {
            let report = test_1d(&data.inputs(), &UniTestConfig { psi, ..config.clone() }).unwrap();
            assert_eq!(report.statistic, 0.0);
            assert!(report.bootstrap_stats.iter().all(|&t| t == 0.0));
            assert_eq!(report.p_value, 1.0);
            assert_eq!(report.b_effective, 30);
        }
    }

    #[test]
    fn deterministic_and_pvalue_on_lattice() {
        let data = simulated(2, 50, false);
        let config = UniTestConfig {
            b: 25,
            seed: 99,
            ..UniTestConfig::default()
        };
        let a = test_1d(&data.inputs(), &config).unwrap();
        let b = test_1d(&data.inputs(), &config).unwrap();
        assert_eq!(a, b);
        let scaled = a.p_value * a.b_effective as f64;
        assert!((scaled - scaled.round()).abs() < 1e-12);
        assert!(a.statistic >= 0.0 && a.bootstrap_stats.iter().all(|&t| t >= 0.0));
        assert_eq!(a.bootstrap_stats.len(), 25);
        assert_eq!(a.statistic, statistic_s(&data.inputs(), &config).unwrap());
    }

    #[test]
    fn both_functionals_share_replicates() {
        let data = simulated(3, 40, false);
        let config = UniTestConfig {
            b: 10,
            seed: 5,
            ..UniTestConfig::default()
        };
        let both = test_1d_with(&data.inputs(), &config, &PsiFunctional::ALL).unwrap();
        for (psi, report) in PsiFunctional::ALL.iter().zip(&both) {
            let single = test_1d(&data.inputs(), &UniTestConfig { psi: *psi, ..config.clone() }).unwrap();
            assert_eq!(&single, report);
        }
    }

    #[test]
    fn engine_statistic_matches_weighted_average_form() {
        let data = simulated(4, 80, false);
        let config = UniTestConfig {
            b: 1,
            ..UniTestConfig::default()
        };
        let report = test_1d(&data.inputs(), &config).unwrap();
        // Recompute from curves built directly with the reported bandwidths.
        let n = 160;
        let h = report.bandwidths.smoothing;
        let mut curves = Vec::new();
        for k in 0..2 {
            let gf = report.bandwidths.diseased[0][k];
            let gg = report.bandwidths.healthy[0][k];
            let ff = crate::kernel::fit_location_scale(&data.xf, &data.yf.column(k), gf).unwrap();
            let fg = crate::kernel::fit_location_scale(&data.xg, &data.yg.column(k), gg).unwrap();
            let ab = crate::roc::ab_from_fits(&ff, &fg, 0.5, 0.5).unwrap();
            curves.push(
                crate::roc::estimate_roc_from_residuals(&ff.residuals, &fg.residuals, ab.a, ab.b, h, &grid())
                    .unwrap(),
            );
        }
        let s = statistic_from_curves(&curves, &report.bandwidths.pooled[0], n, PsiFunctional::L2).unwrap();
        assert!((s - report.statistic).abs() < 1e-10 * s.max(1.0), "{s} vs {}", report.statistic);
    }

    #[test]
    fn rejects_single_marker() {
        let data = simulated(5, 30, false);
        let yf = Matrix::from_columns(&[data.yf.column(0)]).unwrap();
        let yg = Matrix::from_columns(&[data.yg.column(0)]).unwrap();
        let inputs = UniTestInputs {
            diseased: UniSample {
                covariate: &data.xf,
                markers: &yf,
            },
            healthy: UniSample {
                covariate: &data.xg,
                markers: &yg,
            },
            x_f: 0.5,
            x_g: 0.5,
        };
        assert!(matches!(
            test_1d(&inputs, &UniTestConfig::default()),
            Err(Error::UnsupportedK(1))
        ));
    }
}
