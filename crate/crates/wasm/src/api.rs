use condroc::kernel::{fit_location_scale, lscv_bandwidth};
use condroc::multivariate::{draw_directions, DirectionMode};
use condroc::projection::{project, project_point};
use condroc::roc::{ab_from_fits, binormal_roc_oracle, default_roc_bandwidth, estimate_roc_from_residuals};
use condroc::simulation::{conditioning_point, eval_scenario_functions, gen_study, ExperimentPlan, ScenarioId};
use condroc::{test_md_with, PGrid, PsiFunctional, TestReport};
use serde::{Deserialize, Serialize};

/// Largest per-population sample the page may request.
pub const MAX_N: usize = 1000;
pub const MAX_B: usize = 500;
pub const MAX_DIRECTIONS: usize = 200;

fn default_n() -> usize {
    100
}

fn default_seed() -> u64 {
    1
}

fn default_grid() -> usize {
    51
}

fn default_b() -> usize {
    100
}

fn default_n_beta() -> usize {
    5
}

fn default_m_beta() -> usize {
    25
}

fn default_mode() -> DirectionMode {
    DirectionMode::Grid
}

fn default_count() -> usize {
    20
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CurvesRequest {
    scenarios: Vec<ScenarioId>,
    #[serde(default = "default_n")]
    n_f: usize,
    #[serde(default = "default_n")]
    n_g: usize,
    #[serde(default)]
    rho: f64,
    #[serde(default = "default_seed")]
    seed: u64,
    #[serde(default = "default_grid")]
    grid: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TestRequest {
    scenarios: Vec<ScenarioId>,
    #[serde(default = "default_n")]
    n_f: usize,
    #[serde(default = "default_n")]
    n_g: usize,
    #[serde(default)]
    rho: f64,
    #[serde(default = "default_seed")]
    seed: u64,
    #[serde(default = "default_b")]
    b: usize,
    #[serde(default = "default_n_beta")]
    n_beta: usize,
    #[serde(default = "default_m_beta")]
    m_beta: usize,
    #[serde(default = "default_mode")]
    mode: DirectionMode,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DirectionsRequest {
    d: usize,
    #[serde(default = "default_mode")]
    mode: DirectionMode,
    #[serde(default = "default_count")]
    count: usize,
    #[serde(default = "default_seed")]
    seed: u64,
}

#[derive(Debug, Serialize)]
struct MarkerCurves {
    scenario: ScenarioId,
    a: f64,
    b: f64,
    true_roc: Vec<f64>,
    a_hat: f64,
    b_hat: f64,
    estimated_roc: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct CurvesResponse {
    x: Vec<f64>,
    p: Vec<f64>,
    beta_f: Vec<f64>,
    beta_g: Vec<f64>,
    markers: Vec<MarkerCurves>,
}

#[derive(Debug, Serialize)]
struct TestResponse {
    l2: TestReport,
    ks: TestReport,
}

#[derive(Debug, Serialize)]
struct DirectionsResponse {
    diseased: Vec<Vec<f64>>,
    healthy: Vec<Vec<f64>>,
    pairs: Vec<(usize, usize)>,
}

fn parse<'a, T: Deserialize<'a>>(request: &'a str) -> Result<T, String> {
    serde_json::from_str(request).map_err(|e| format!("bad request: {e}"))
}

fn to_json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

fn check_sizes(n_f: usize, n_g: usize) -> Result<(), String> {
    if n_f > MAX_N || n_g > MAX_N {
        return Err(format!("sample sizes above {MAX_N} are not allowed in the browser"));
    }
    Ok(())
}

fn plan(scenarios: Vec<ScenarioId>, n_f: usize, n_g: usize, rho: f64, seed: u64) -> Result<ExperimentPlan, String> {
    check_sizes(n_f, n_g)?;
    let plan = ExperimentPlan {
        seed,
        ..ExperimentPlan::new(scenarios, n_f, n_g, rho)
    };
    plan.validate().map_err(|e| e.to_string())?;
    Ok(plan)
}

/// Simulates one study and returns, per marker, the true conditional ROC
/// at the scenario's conditioning point and the curve estimated along one
/// random direction pair.
pub fn scenario_curves(request: &str) -> Result<String, String> {
    let req: CurvesRequest = parse(request)?;
    let plan = plan(req.scenarios.clone(), req.n_f, req.n_g, req.rho, req.seed)?;
    let grid = PGrid::equispaced(req.grid).map_err(|e| e.to_string())?;
    let study = gen_study(&plan, 0).map_err(|e| e.to_string())?;
    let x = conditioning_point(plan.dim()).map_err(|e| e.to_string())?;
    let set = draw_directions(plan.dim(), DirectionMode::Single, 1, req.seed).map_err(|e| e.to_string())?;
    let pair = set.pair(0);
    let run = || -> condroc::Result<Vec<MarkerCurves>> {
        let xf = project(&study.diseased.covariates, &pair.beta_f)?;
        let xg = project(&study.healthy.covariates, &pair.beta_g)?;
        let x_f = project_point(&x, &pair.beta_f)?;
        let x_g = project_point(&x, &pair.beta_g)?;
        let h = default_roc_bandwidth(req.n_f + req.n_g);
        let mut markers = Vec::new();
        for (k, &scenario) in req.scenarios.iter().enumerate() {
            let v = eval_scenario_functions(scenario, &x)?;
            let (a, b) = ((v.mu_f - v.mu_g) / v.sigma_f, v.sigma_g / v.sigma_f);
            let yf = study.diseased.markers.column(k);
            let yg = study.healthy.markers.column(k);
            let fit_f = fit_location_scale(&xf, &yf, lscv_bandwidth(&xf, &yf)?)?;
            let fit_g = fit_location_scale(&xg, &yg, lscv_bandwidth(&xg, &yg)?)?;
            let ab = ab_from_fits(&fit_f, &fit_g, x_f, x_g)?;
            markers.push(MarkerCurves {
                scenario,
                a,
                b,
                true_roc: binormal_roc_oracle(a, b, &grid)?.values,
                a_hat: ab.a,
                b_hat: ab.b,
                estimated_roc: estimate_roc_from_residuals(&fit_f.residuals, &fit_g.residuals, ab.a, ab.b, h, &grid)?
                    .values,
            });
        }
        Ok(markers)
    };
    let markers = run().map_err(|e| e.to_string())?;
    to_json(&CurvesResponse {
        x,
        p: grid.values().to_vec(),
        beta_f: pair.beta_f.coords().to_vec(),
        beta_g: pair.beta_g.coords().to_vec(),
        markers,
    })
}

/// Runs the test on the study a simulation would draw as its first
/// replication, so the p-values match `run_experiment` on the same plan.
pub fn run_test(request: &str) -> Result<String, String> {
    let req: TestRequest = parse(request)?;
    if req.b > MAX_B {
        return Err(format!("more than {MAX_B} bootstrap replicates are not allowed in the browser"));
    }
    let plan = ExperimentPlan {
        b: req.b,
        n_beta: req.n_beta,
        m_beta: req.m_beta,
        mode: req.mode,
        ..plan(req.scenarios, req.n_f, req.n_g, req.rho, req.seed)?
    };
    plan.validate().map_err(|e| e.to_string())?;
    let run = || -> condroc::Result<Vec<TestReport>> {
        let study = gen_study(&plan, 0)?;
        test_md_with(&study, &plan.test_config(0)?, &PsiFunctional::ALL)
    };
    let mut reports = run().map_err(|e| e.to_string())?.into_iter();
    let (l2, ks) = (reports.next().unwrap(), reports.next().unwrap());
    to_json(&TestResponse { l2, ks })
}

pub fn sample_directions(request: &str) -> Result<String, String> {
    let req: DirectionsRequest = parse(request)?;
    if req.count > MAX_DIRECTIONS {
        return Err(format!("at most {MAX_DIRECTIONS} directions"));
    }
    let set = draw_directions(req.d, req.mode, req.count, req.seed).map_err(|e| e.to_string())?;
    let coords = |v: &[condroc::projection::Direction]| v.iter().map(|b| b.coords().to_vec()).collect();
    to_json(&DirectionsResponse {
        diseased: coords(&set.diseased),
        healthy: coords(&set.healthy),
        pairs: set.pairs,
    })
}
