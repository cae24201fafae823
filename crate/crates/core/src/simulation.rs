//! Synthetic location-scale scenarios and level/power experiments.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::multivariate::{test_md_with, DirectionMode, MultiTestConfig};
use crate::parallel::map_range;
use crate::rng::{derive_seed, domain, stream};
use crate::roc::PGrid;
use crate::study::{apply_standardization, fit_standardization, Population, PopulationSample, Study};
use crate::univariate::{BandwidthPolicy, PsiFunctional};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScenarioId {
    #[serde(rename = "ROC1", alias = "roc1")]
    Roc1,
    #[serde(rename = "ROC2", alias = "roc2")]
    Roc2,
    #[serde(rename = "ROC3", alias = "roc3")]
    Roc3,
    #[serde(rename = "ROC4", alias = "roc4")]
    Roc4,
    #[serde(rename = "ROC5", alias = "roc5")]
    Roc5,
    #[serde(rename = "ROC6", alias = "roc6")]
    Roc6,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 6] = [
        ScenarioId::Roc1,
        ScenarioId::Roc2,
        ScenarioId::Roc3,
        ScenarioId::Roc4,
        ScenarioId::Roc5,
        ScenarioId::Roc6,
    ];

    pub fn dim(self) -> usize {
        match self {
            ScenarioId::Roc1 | ScenarioId::Roc2 | ScenarioId::Roc3 => 2,
            _ => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ScenarioId::Roc1 => "ROC1",
            ScenarioId::Roc2 => "ROC2",
            ScenarioId::Roc3 => "ROC3",
            ScenarioId::Roc4 => "ROC4",
            ScenarioId::Roc5 => "ROC5",
            ScenarioId::Roc6 => "ROC6",
        }
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ScenarioId::ALL
            .into_iter()
            .find(|id| id.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidPlan(format!("unknown scenario `{s}` (expected ROC1..ROC6)")))
    }
}

/// Conditional means and standard deviations of both populations at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScenarioValues {
    pub mu_f: f64,
    pub mu_g: f64,
    pub sigma_f: f64,
    pub sigma_g: f64,
}

pub fn eval_scenario_functions(id: ScenarioId, x: &[f64]) -> Result<ScenarioValues> {
    if x.len() != id.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{id} takes {} covariates, got {}",
            id.dim(),
            x.len()
        )));
    }
    let base = (0.5 * PI * x[0]).sin() + 0.1 * x[1];
    let v = match id {
        ScenarioId::Roc1 | ScenarioId::Roc2 | ScenarioId::Roc3 => {
            let s = 0.5 + 0.5 * x[0];
            let (mu_f, mu_g) = match id {
                ScenarioId::Roc1 => (base, 0.5 * x[0] * x[1]),
                ScenarioId::Roc2 => (0.3 + base, 0.5 * x[0] * x[1]),
                _ => (base, -0.3 + 0.4 * x[1] + 0.5 * x[0] * x[1]),
            };
            ScenarioValues {
                mu_f,
                mu_g,
                sigma_f: s,
                sigma_g: s,
            }
        }
        _ => {
            let mu_f = base + 0.5 * x[2];
            let s = 0.5 + 0.1 * x[2];
            match id {
                ScenarioId::Roc4 => ScenarioValues {
                    mu_f,
                    mu_g: 0.5 * x[0] * x[1] + x[2],
                    sigma_f: s,
                    sigma_g: s,
                },
                ScenarioId::Roc5 => ScenarioValues {
                    mu_f,
                    mu_g: x[0] * x[1] + x[2],
                    sigma_f: s,
                    sigma_g: s,
                },
                _ => ScenarioValues {
                    mu_f,
                    mu_g: -0.3 + 0.5 * x[0] * x[1] + x[2],
                    sigma_f: 0.5 + 0.2 * x[1] + 0.3 * x[2],
                    sigma_g: s,
                },
            }
        }
    };
    Ok(v)
}

/// Conditioning point used in every simulated study.
pub fn conditioning_point(d: usize) -> Result<Vec<f64>> {
    match d {
        2 => Ok(vec![0.5, 0.6]),
        3 => Ok(vec![0.5, 0.6, 0.5]),
        _ => Err(Error::InvalidPlan(format!("scenarios are defined for d = 2 or 3, not {d}"))),
    }
}

/// Lower Cholesky factor of the `k x k` matrix with unit diagonal and `rho` elsewhere.
fn equicorrelation_cholesky(k: usize, rho: f64) -> Result<Vec<Vec<f64>>> {
    let bound = if k > 1 { -1.0 / (k as f64 - 1.0) } else { -1.0 };
    if !(rho > bound && rho < 1.0) {
        return Err(Error::InvalidCorrelation { rho, k, bound });
    }
    let mut l = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..=i {
            let target = if i == j { 1.0 } else { rho };
            let s: f64 = (0..j).map(|m| l[i][m] * l[j][m]).sum();
            if i == j {
                l[i][i] = (target - s).sqrt();
            } else {
                l[i][j] = (target - s) / l[j][j];
            }
        }
    }
    Ok(l)
}

/// `n` rows of standard normals with pairwise correlation `rho`.
pub fn gen_correlated_errors<R: Rng + ?Sized>(n: usize, k: usize, rho: f64, rng: &mut R) -> Result<Matrix> {
    let l = equicorrelation_cholesky(k, rho)?;
    let mut out = Matrix::zeros(n, k);
    let mut z = vec![0.0; k];
    for i in 0..n {
        for v in z.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        for (a, row) in l.iter().enumerate() {
            out.set(i, a, row[..=a].iter().zip(&z).map(|(c, e)| c * e).sum());
        }
    }
    Ok(out)
}

fn default_reps() -> usize {
    200
}
fn default_b() -> usize {
    200
}
fn default_n_beta() -> usize {
    5
}
fn default_m_beta() -> usize {
    25
}
fn default_alphas() -> Vec<f64> {
    vec![0.05]
}
fn default_psi() -> Vec<PsiFunctional> {
    PsiFunctional::ALL.to_vec()
}
fn default_mode() -> DirectionMode {
    DirectionMode::Grid
}
fn default_grid_size() -> usize {
    crate::roc::DEFAULT_GRID_SIZE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    /// One scenario per marker.
    pub scenarios: Vec<ScenarioId>,
    #[serde(alias = "nF")]
    pub n_f: usize,
    #[serde(alias = "nG")]
    pub n_g: usize,
    pub rho: f64,
    #[serde(default = "default_b", alias = "B")]
    pub b: usize,
    #[serde(default = "default_mode")]
    pub mode: DirectionMode,
    #[serde(default = "default_n_beta")]
    pub n_beta: usize,
    #[serde(default = "default_m_beta")]
    pub m_beta: usize,
    #[serde(default = "default_reps", alias = "R")]
    pub reps: usize,
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    #[serde(default = "default_psi")]
    pub psi: Vec<PsiFunctional>,
    #[serde(default)]
    pub seed: u64,
    /// Standardize covariates before testing. Off by default because the
    /// scenarios already live on the unit cube.
    #[serde(default)]
    pub standardize: bool,
    #[serde(default = "default_grid_size")]
    pub grid_size: usize,
}

impl ExperimentPlan {
    pub fn new(scenarios: Vec<ScenarioId>, n_f: usize, n_g: usize, rho: f64) -> Self {
        Self {
            scenarios,
            n_f,
            n_g,
            rho,
            b: default_b(),
            mode: default_mode(),
            n_beta: default_n_beta(),
            m_beta: default_m_beta(),
            reps: default_reps(),
            alphas: default_alphas(),
            psi: default_psi(),
            seed: 0,
            standardize: false,
            grid_size: default_grid_size(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let first = *self
            .scenarios
            .first()
            .ok_or_else(|| Error::InvalidPlan("no scenarios".into()))?;
        if self.scenarios.len() < 2 {
            return Err(Error::InvalidPlan("at least two scenarios (markers) are required".into()));
        }
        if self.scenarios.iter().any(|s| s.dim() != first.dim()) {
            return Err(Error::InvalidPlan("scenarios mix covariate dimensions".into()));
        }
        if self.n_f < 3 || self.n_g < 3 {
            return Err(Error::InvalidPlan("sample sizes must be at least 3".into()));
        }
        if self.reps == 0 || self.b == 0 || self.n_beta == 0 || self.m_beta == 0 {
            return Err(Error::InvalidPlan("reps, B, n_beta and m_beta must be positive".into()));
        }
        if self.psi.is_empty() || self.alphas.is_empty() {
            return Err(Error::InvalidPlan("psi and alphas must be non-empty".into()));
        }
        if self.alphas.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return Err(Error::InvalidPlan("alphas must lie in [0, 1]".into()));
        }
        equicorrelation_cholesky(self.scenarios.len(), self.rho)?;
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.scenarios.first().map_or(0, |s| s.dim())
    }

    /// Scenario column label, e.g. `ROC1-ROC2`.
    pub fn label(&self) -> String {
        self.scenarios.iter().map(|s| s.name()).collect::<Vec<_>>().join("-")
    }

    pub fn is_null(&self) -> bool {
        self.scenarios.windows(2).all(|w| w[0] == w[1])
    }

    pub fn test_config(&self, rep: usize) -> Result<MultiTestConfig> {
        Ok(MultiTestConfig {
            mode: self.mode,
            n_beta: self.n_beta,
            m_beta: self.m_beta,
            b: self.b,
            psi: self.psi[0],
            grid: PGrid::equispaced(self.grid_size)?,
            seed: derive_seed(self.seed, domain::TEST_SEED, rep as u64),
            bandwidths: BandwidthPolicy::Lscv,
            h: None,
        })
    }
}

fn gen_population<R: Rng + ?Sized>(
    plan: &ExperimentPlan,
    population: Population,
    n: usize,
    rng: &mut R,
) -> Result<PopulationSample> {
    let d = plan.dim();
    let k = plan.scenarios.len();
    let covariates: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random::<f64>()).collect()).collect();
    let errors = gen_correlated_errors(n, k, plan.rho, rng)?;
    let mut markers = Matrix::zeros(n, k);
    for (i, x) in covariates.iter().enumerate() {
        for (j, &id) in plan.scenarios.iter().enumerate() {
            let v = eval_scenario_functions(id, x)?;
            let (mu, sigma) = match population {
                Population::Diseased => (v.mu_f, v.sigma_f),
                Population::Healthy => (v.mu_g, v.sigma_g),
            };
            markers.set(i, j, mu + sigma * errors.get(i, j));
        }
    }
    PopulationSample::new(population, Matrix::from_rows(&covariates)?, markers)
}

/// Draws one study from `rng`: diseased covariates and errors, then healthy.
pub fn gen_study_with<R: Rng + ?Sized>(plan: &ExperimentPlan, rng: &mut R) -> Result<Study> {
    plan.validate()?;
    let diseased = gen_population(plan, Population::Diseased, plan.n_f, rng)?;
    let healthy = gen_population(plan, Population::Healthy, plan.n_g, rng)?;
    Study::new(diseased, healthy, conditioning_point(plan.dim())?)
}

/// Study of repetition `rep`, from its own stream.
pub fn gen_study(plan: &ExperimentPlan, rep: usize) -> Result<Study> {
    gen_study_with(plan, &mut stream(plan.seed, domain::STUDY_DATA, rep as u64))
}

/// One line of the results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub scenario: String,
    #[serde(rename = "nF")]
    pub n_f: usize,
    #[serde(rename = "nG")]
    pub n_g: usize,
    pub rho: f64,
    pub psi: PsiFunctional,
    pub mode: DirectionMode,
    pub alpha: f64,
    pub rate: f64,
    pub reps: usize,
}

impl ResultRow {
    /// 99% Wilson interval for the rejection probability.
    pub fn band(&self) -> (f64, f64) {
        binomial_band(self.rate, self.reps, 2.575_829_303_549_0)
    }
}

/// Wilson score interval for a proportion `rate` observed over `n` trials.
pub fn binomial_band(rate: f64, n: usize, z: f64) -> (f64, f64) {
    let n = n as f64;
    let z2 = z * z;
    let centre = (rate + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z * (rate * (1.0 - rate) / n + z2 / (4.0 * n * n)).sqrt() / (1.0 + z2 / n);
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub plan: ExperimentPlan,
    /// `p_values[psi][rep]`
    pub p_values: Vec<Vec<f64>>,
    pub rows: Vec<ResultRow>,
}

fn one_rep(plan: &ExperimentPlan, rep: usize) -> Result<Vec<f64>> {
    let mut study = gen_study(plan, rep)?;
    if plan.standardize {
        let params = fit_standardization(&study)?;
        study = apply_standardization(&study, &params)?;
    }
    let reports = test_md_with(&study, &plan.test_config(rep)?, &plan.psi)?;
    Ok(reports.into_iter().map(|r| r.p_value).collect())
}

/// Repeats generate-and-test `plan.reps` times and tabulates rejection rates.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<ExperimentResult> {
    run_experiment_with_progress(plan, &|_| {})
}

/// As [`run_experiment`], calling `progress` with the number of finished
/// repetitions after each one completes (in completion order).
pub fn run_experiment_with_progress(
    plan: &ExperimentPlan,
    progress: &(dyn Fn(usize) + Sync),
) -> Result<ExperimentResult> {
    plan.validate()?;
    let done = AtomicUsize::new(0);
    let per_rep = map_range(plan.reps, |rep| {
        let out = one_rep(plan, rep);
        progress(done.fetch_add(1, Ordering::Relaxed) + 1);
        out
    })
    .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let p_values: Vec<Vec<f64>> = (0..plan.psi.len())
        .map(|s| per_rep.iter().map(|p| p[s]).collect())
        .collect();
    let mut rows = Vec::new();
    for (s, &psi) in plan.psi.iter().enumerate() {
        for &alpha in &plan.alphas {
            let hits = p_values[s].iter().filter(|&&p| p <= alpha).count();
            rows.push(ResultRow {
                scenario: plan.label(),
                n_f: plan.n_f,
                n_g: plan.n_g,
                rho: plan.rho,
                psi,
                mode: plan.mode,
                alpha,
                rate: hits as f64 / plan.reps as f64,
                reps: plan.reps,
            });
        }
    }
    Ok(ExperimentResult {
        plan: plan.clone(),
        p_values,
        rows,
    })
}

/// Experiment with every marker drawn from the same scenario.
pub fn run_level_experiment(plan: &ExperimentPlan) -> Result<ExperimentResult> {
    if !plan.is_null() {
        return Err(Error::InvalidPlan("a level experiment needs identical scenarios".into()));
    }
    run_experiment(plan)
}

/// Experiment with at least two different scenarios.
pub fn run_power_experiment(plan: &ExperimentPlan) -> Result<ExperimentResult> {
    if plan.is_null() {
        return Err(Error::InvalidPlan("a power experiment needs at least two distinct scenarios".into()));
    }
    run_experiment(plan)
}
