use std::path::Path;

use condroc::kernel::{fit_location_scale, lscv_bandwidth};
use condroc::multivariate::{draw_directions, DirectionMode};
use condroc::projection::{project, project_point, Direction};
use condroc::roc::{ab_from_fits, default_roc_bandwidth, estimate_roc_from_residuals};
use condroc::simulation::{run_experiment_with_progress, ExperimentPlan, ResultRow};
use condroc::study::{apply_standardization, fit_standardization};
use condroc::univariate::{UniSample, UniTestInputs};
use condroc::{test_1d, test_md, MultiTestConfig, PGrid, Study, TestReport, UniTestConfig};
use serde::Serialize;

use crate::cli::{DataArgs, EstimateArgs, SimulateArgs, SynthArgs, SynthKind, TestArgs};
use crate::dataset::{dataset_csv, read_dataset};
use crate::error::{CliError, CliResult};
use crate::output::{csv_bytes, emit};
use crate::synth::{binormal_study, h0_study};

/// Loads the study and standardizes it when requested and `d >= 2`.
fn load(args: &DataArgs) -> CliResult<(Study, Option<condroc::study::StandardizationParams>)> {
    let dataset = read_dataset(&args.data, &args.log_cols)?;
    let study = dataset.into_study(args.x.clone())?;
    if args.standardize() && study.dim() >= 2 {
        let params = fit_standardization(&study)?;
        let scaled = apply_standardization(&study, &params)?;
        Ok((scaled, Some(params)))
    } else {
        Ok((study, None))
    }
}

fn grid(size: usize) -> CliResult<PGrid> {
    if size == 0 {
        return Err(CliError::Usage("--grid must be positive".into()));
    }
    Ok(PGrid::equispaced(size)?)
}

#[derive(Serialize)]
struct CurveRow {
    p: f64,
    roc: f64,
}

pub fn estimate(args: &EstimateArgs) -> CliResult<()> {
    let (study, _) = load(&args.data)?;
    let k = study.n_markers();
    if args.marker == 0 || args.marker > k {
        return Err(CliError::Usage(format!("--marker must be between 1 and {k}")));
    }
    let grid = grid(args.data.grid)?;
    let d = study.dim();
    let (beta_f, beta_g) = match (&args.beta_f, &args.beta_g) {
        (Some(f), Some(g)) => (Direction::new(f.clone())?, Direction::new(g.clone())?),
        (None, None) if d == 1 => (Direction::basis(1, 0), Direction::basis(1, 0)),
        (None, None) => {
            let set = draw_directions(d, DirectionMode::Single, 1, args.data.seed)?;
            let pair = set.pair(0);
            (pair.beta_f, pair.beta_g)
        }
        _ => return Err(CliError::Usage("give both --beta-f and --beta-g, or neither".into())),
    };
    let xf = project(&study.diseased.covariates, &beta_f)?;
    let xg = project(&study.healthy.covariates, &beta_g)?;
    let x_f = project_point(&study.x, &beta_f)?;
    let x_g = project_point(&study.x, &beta_g)?;
    let yf = study.diseased.markers.column(args.marker - 1);
    let yg = study.healthy.markers.column(args.marker - 1);
    let fit_f = fit_location_scale(&xf, &yf, lscv_bandwidth(&xf, &yf)?)?;
    let fit_g = fit_location_scale(&xg, &yg, lscv_bandwidth(&xg, &yg)?)?;
    let ab = ab_from_fits(&fit_f, &fit_g, x_f, x_g)?;
    let h = default_roc_bandwidth(fit_f.n() + fit_g.n());
    let curve = estimate_roc_from_residuals(&fit_f.residuals, &fit_g.residuals, ab.a, ab.b, h, &grid)?;
    eprintln!(
        "marker y{}: g_F = {:.6}, g_G = {:.6}, h = {:.6}, a = {:.6}, b = {:.6}",
        args.marker, fit_f.bandwidth, fit_g.bandwidth, h, ab.a, ab.b
    );
    if d >= 2 {
        eprintln!("beta_F = {:?}, beta_G = {:?}", beta_f.coords(), beta_g.coords());
    }
    let rows: Vec<CurveRow> = curve
        .grid
        .values()
        .iter()
        .zip(&curve.values)
        .map(|(&p, &roc)| CurveRow { p, roc })
        .collect();
    emit(args.data.out.as_deref(), &csv_bytes(&rows)?)
}

pub fn run_test(args: &TestArgs) -> CliResult<TestReport> {
    if args.b == 0 || args.n_beta == 0 || args.m_beta == 0 {
        return Err(CliError::Usage("--B, --n-beta and --m-beta must be positive".into()));
    }
    let (study, standardization) = load(&args.data)?;
    let grid = grid(args.data.grid)?;
    let mut report = if study.dim() == 1 {
        let xf = study.diseased.covariates.column(0);
        let xg = study.healthy.covariates.column(0);
        let inputs = UniTestInputs {
            diseased: UniSample {
                covariate: &xf,
                markers: &study.diseased.markers,
            },
            healthy: UniSample {
                covariate: &xg,
                markers: &study.healthy.markers,
            },
            x_f: study.x[0],
            x_g: study.x[0],
        };
        let config = UniTestConfig {
            psi: args.psi.into(),
            b: args.b,
            grid,
            seed: args.data.seed,
            ..UniTestConfig::default()
        };
        test_1d(&inputs, &config)?
    } else {
        let config = MultiTestConfig {
            mode: args.mode.into(),
            n_beta: args.n_beta,
            m_beta: args.m_beta,
            b: args.b,
            psi: args.psi.into(),
            grid,
            seed: args.data.seed,
            ..MultiTestConfig::default()
        };
        test_md(&study, &config)?
    };
    report.standardization = standardization;
    Ok(report)
}

pub fn test(args: &TestArgs) -> CliResult<()> {
    let report = run_test(args)?;
    println!("statistic   {:.6}", report.statistic);
    println!("p-value     {:.4}  (B_effective = {})", report.p_value, report.b_effective);
    println!("psi         {}", report.psi);
    match report.mode {
        Some(mode) => println!("mode        {mode} ({} direction pairs)", report.directions.len()),
        None => println!("mode        one-dimensional covariate"),
    }
    if report.diagnostics.experimental {
        println!("note        single-projection mode is experimental");
    }
    if let Some(out) = &args.data.out {
        let mut json = serde_json::to_vec_pretty(&report).map_err(|e| CliError::io(out, e.into()))?;
        json.push(b'\n');
        crate::output::write_atomic(out, &json)?;
    }
    Ok(())
}

fn plan_error(path: &Path, message: impl Into<String>) -> CliError {
    CliError::Plan {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

/// A plan file holds one experiment at top level or an `experiment` array.
pub fn read_plans(path: &Path) -> CliResult<Vec<ExperimentPlan>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_plans(&text, path)
}

pub fn parse_plans(text: &str, path: &Path) -> CliResult<Vec<ExperimentPlan>> {
    let value: toml::Table = toml::from_str(text).map_err(|e| plan_error(path, e.to_string()))?;
    let plans: Vec<ExperimentPlan> = match value.get("experiment") {
        Some(list) => {
            if value.len() != 1 {
                return Err(plan_error(path, "`experiment` tables cannot be mixed with top-level keys"));
            }
            list.clone()
                .try_into()
                .map_err(|e: toml::de::Error| plan_error(path, e.to_string()))?
        }
        None => vec![toml::Value::Table(value)
            .try_into()
            .map_err(|e: toml::de::Error| plan_error(path, e.to_string()))?],
    };
    if plans.is_empty() {
        return Err(plan_error(path, "no experiments"));
    }
    for plan in &plans {
        plan.validate().map_err(|e| plan_error(path, e.to_string()))?;
    }
    Ok(plans)
}

pub fn run_plans(plans: &[ExperimentPlan], verbose: bool) -> CliResult<Vec<ResultRow>> {
    let mut rows = Vec::new();
    for (i, plan) in plans.iter().enumerate() {
        if verbose {
            eprintln!(
                "[{}/{}] {} (nF={}, nG={}, rho={}, mode={}, reps={})",
                i + 1,
                plans.len(),
                plan.label(),
                plan.n_f,
                plan.n_g,
                plan.rho,
                plan.mode,
                plan.reps
            );
        }
        let step = (plan.reps / 10).max(1);
        let progress = |done: usize| {
            if verbose && (done.is_multiple_of(step) || done == plan.reps) {
                eprintln!("  {done}/{} repetitions", plan.reps);
            }
        };
        let result = run_experiment_with_progress(plan, &progress)?;
        if verbose {
            for row in &result.rows {
                let (lo, hi) = row.band();
                eprintln!(
                    "  {} alpha={} rate={:.4} (99% band {:.4}..{:.4})",
                    row.psi, row.alpha, row.rate, lo, hi
                );
            }
        }
        rows.extend(result.rows);
    }
    Ok(rows)
}

pub fn simulate(args: &SimulateArgs) -> CliResult<()> {
    let mut plans = read_plans(&args.plan)?;
    if let Some(seed) = args.seed {
        for plan in &mut plans {
            plan.seed = seed;
        }
    }
    let rows = run_plans(&plans, true)?;
    emit(args.out.as_deref(), &csv_bytes(&rows)?)
}

pub fn synth(args: &SynthArgs) -> CliResult<()> {
    let study = match args.kind {
        SynthKind::H0 => h0_study(args.n.unwrap_or(100), args.seed)?,
        SynthKind::Binormal => binormal_study(args.n.unwrap_or(2000), args.seed)?,
    };
    emit(args.out.as_deref(), dataset_csv(&study).as_bytes())
}
