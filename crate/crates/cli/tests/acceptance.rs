//! Acceptance checks. Each test prints one `criterion N: PASS|FAIL` line.
//! Criteria 4 and 5 run full Monte Carlo experiments and take tens of
//! minutes on a single core.

use std::io::Write;
use std::path::Path;
use std::process::Command;

use condroc::kernel::{fit_location_scale, lscv_bandwidth};
use condroc::multivariate::{draw_directions, DirectionMode};
use condroc::projection::{project, project_point};
use condroc::rng::stream;
use condroc::roc::{
    ab_from_fits, binormal_roc_oracle, default_roc_bandwidth, estimate_roc_from_residuals, iroc_from_samples,
    plugin_iroc_at, plugin_roc, plugin_roc_at, swap_roles, weighted_average_curve, EmpiricalCdf,
};
use condroc::simulation::{gen_study, run_experiment, ExperimentPlan, ExperimentResult, ScenarioId};
use condroc::univariate::{AlphaMatrix, UniSample, UniTestInputs};
use condroc::{
    test_1d_with, test_md_with, BandwidthPolicy, MultiTestConfig, PGrid, PsiFunctional, RocCurve, Study,
    UniTestConfig,
};
use condroc_cli::synth::{binormal_study, BINORMAL_MARKERS};
use rand::Rng;

const SEED: u64 = 1;

/// Writes to the stdout handle directly so the line shows up even when the
/// test harness captures output.
fn verdict(n: u32, pass: bool, detail: &str) {
    let line = format!("criterion {n}: {}  {detail}\n", if pass { "PASS" } else { "FAIL" });
    let mut out = std::io::stdout().lock();
    out.write_all(line.as_bytes()).unwrap();
    out.flush().unwrap();
    assert!(pass, "criterion {n} failed: {detail}");
}

#[test]
fn criterion_1_algebraic_identities() {
    let mut rng = stream(SEED, 100, 0);
    let grid = PGrid::default();
    let (mut worst_alpha, mut worst_avg) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let k = rng.random_range(2..=6);
        let g: Vec<f64> = (0..k).map(|_| 10f64.powf(rng.random_range(-3.0..0.5))).collect();
        let alpha = AlphaMatrix::new(&g).unwrap();
        for j in 0..k {
            let s: f64 = (0..k).map(|i| g[i].sqrt() * alpha.get(i, j)).sum();
            worst_alpha = worst_alpha.max(s.abs());
        }
        let curves: Vec<RocCurve> = (0..k)
            .map(|_| {
                let mut v: Vec<f64> = (0..grid.len()).map(|_| rng.random::<f64>()).collect();
                v.sort_by(f64::total_cmp);
                RocCurve::new(grid.clone(), v).unwrap()
            })
            .collect();
        let avg = weighted_average_curve(&curves, &g).unwrap();
        for i in 0..grid.len() {
            let s: f64 = curves.iter().zip(&g).map(|(c, gk)| gk * (c.values[i] - avg.values[i])).sum();
            worst_avg = worst_avg.max(s.abs());
        }
    }
    verdict(
        1,
        worst_alpha <= 1e-12 && worst_avg <= 1e-10,
        &format!("max centering error {worst_alpha:.2e} (<= 1e-12), max weighted residual {worst_avg:.2e} (<= 1e-10)"),
    );
}

#[test]
fn criterion_2_binormal_oracle_and_vanishing_h() {
    let study = binormal_study(2000, SEED).unwrap();
    let grid = PGrid::default();
    let xf = study.diseased.covariates.column(0);
    let xg = study.healthy.covariates.column(0);
    let mut sups = Vec::new();
    let mut truth = Vec::new();
    let mut h_dists = Vec::new();
    for (k, &(a, b)) in BINORMAL_MARKERS.iter().enumerate() {
        let yf = study.diseased.markers.column(k);
        let yg = study.healthy.markers.column(k);
        let ff = fit_location_scale(&xf, &yf, lscv_bandwidth(&xf, &yf).unwrap()).unwrap();
        let fg = fit_location_scale(&xg, &yg, lscv_bandwidth(&xg, &yg).unwrap()).unwrap();
        let ab = ab_from_fits(&ff, &fg, 0.5, 0.5).unwrap();
        let h = default_roc_bandwidth(4000);
        let est = estimate_roc_from_residuals(&ff.residuals, &fg.residuals, ab.a, ab.b, h, &grid).unwrap();
        sups.push(est.sup_distance(&binormal_roc_oracle(ab.a, ab.b, &grid).unwrap()).unwrap());
        truth.push(est.sup_distance(&binormal_roc_oracle(a, b, &grid).unwrap()).unwrap());
        let plug = plugin_roc(&ff.residuals, &fg.residuals, ab.a, ab.b, &grid).unwrap();
        let d: Vec<f64> = [1e-2, 1e-4, 1e-6]
            .iter()
            .map(|&h| {
                estimate_roc_from_residuals(&ff.residuals, &fg.residuals, ab.a, ab.b, h, &grid)
                    .unwrap()
                    .sup_distance(&plug)
                    .unwrap()
            })
            .collect();
        h_dists.push(d);
    }
    let oracle_ok = sups.iter().all(|&s| s <= 0.05);
    let mono_ok = h_dists.iter().all(|d| d[1] <= d[0] && d[2] <= d[1] && d[2] < d[0]);
    verdict(
        2,
        oracle_ok && mono_ok,
        &format!(
            "sup distance to binormal curve at fitted (a, b) {:?} (<= 0.05), at true (a, b) {:?}; \
             distance to plug-in at h = 1e-2, 1e-4, 1e-6: {:?}",
            sups.iter().map(|s| format!("{s:.4}")).collect::<Vec<_>>(),
            truth.iter().map(|s| format!("{s:.4}")).collect::<Vec<_>>(),
            h_dists
                .iter()
                .map(|d| d.iter().map(|v| format!("{v:.2e}")).collect::<Vec<_>>())
                .collect::<Vec<_>>()
        ),
    );
}

fn duplicated_marker_study() -> Study {
    let plan = ExperimentPlan {
        seed: SEED,
        ..ExperimentPlan::new(vec![ScenarioId::Roc1, ScenarioId::Roc1], 80, 80, 0.0)
    };
    let mut study = gen_study(&plan, 0).unwrap();
    for sample in [&mut study.diseased, &mut study.healthy] {
        for i in 0..sample.n() {
            let v = sample.markers.get(i, 0);
            sample.markers.set(i, 1, v);
        }
    }
    study
}

#[test]
fn criterion_3_degenerate_exactness() {
    let study = duplicated_marker_study();
    let fixed = BandwidthPolicy::Fixed(0.2);
    let mut failures = Vec::new();
    let mut runs = 0;
    let mut check = |label: String, reports: Vec<condroc::TestReport>| {
        for r in reports {
            runs += 1;
            if !(r.statistic == 0.0 && r.bootstrap_stats.iter().all(|&t| t == 0.0) && r.p_value == 1.0) {
                failures.push(format!("{label}/{}", r.psi));
            }
        }
    };
    let x1 = study.diseased.covariates.column(0);
    let x2 = study.healthy.covariates.column(0);
    let inputs = UniTestInputs {
        diseased: UniSample {
            covariate: &x1,
            markers: &study.diseased.markers,
        },
        healthy: UniSample {
            covariate: &x2,
            markers: &study.healthy.markers,
        },
        x_f: 0.5,
        x_g: 0.5,
    };
    let uni = UniTestConfig {
        b: 50,
        seed: SEED,
        bandwidths: fixed.clone(),
        ..UniTestConfig::default()
    };
    check("1d".into(), test_1d_with(&inputs, &uni, &PsiFunctional::ALL).unwrap());
    for mode in [DirectionMode::Grid, DirectionMode::Paired, DirectionMode::Single] {
        let config = MultiTestConfig {
            mode,
            n_beta: 3,
            m_beta: 4,
            b: 50,
            seed: SEED,
            bandwidths: fixed.clone(),
            ..MultiTestConfig::default()
        };
        check(format!("{mode}"), test_md_with(&study, &config, &PsiFunctional::ALL).unwrap());
    }
    verdict(
        3,
        failures.is_empty(),
        &format!("{runs} runs (1-d and grid/paired/single, L2 and KS) with S = 0, all T* = 0, p = 1; failures: {failures:?}"),
    );
}

fn experiment(scenarios: [ScenarioId; 2], n_f: usize, n_g: usize, rho: f64, mode: DirectionMode) -> ExperimentResult {
    let plan = ExperimentPlan {
        mode,
        n_beta: 5,
        b: 200,
        reps: 200,
        alphas: vec![0.05],
        psi: PsiFunctional::ALL.to_vec(),
        seed: SEED,
        ..ExperimentPlan::new(scenarios.to_vec(), n_f, n_g, rho)
    };
    run_experiment(&plan).unwrap()
}

fn rate(result: &ExperimentResult, psi: PsiFunctional) -> f64 {
    result.rows.iter().find(|r| r.psi == psi && r.alpha == 0.05).unwrap().rate
}

#[test]
fn criterion_4_level_calibration() {
    let mut pass = true;
    let mut detail = Vec::new();
    for rho in [-0.5, 0.0, 0.5] {
        let r = experiment([ScenarioId::Roc1, ScenarioId::Roc1], 100, 100, rho, DirectionMode::Grid);
        let (l2, ks) = (rate(&r, PsiFunctional::L2), rate(&r, PsiFunctional::Ks));
        pass &= (0.02..=0.10).contains(&l2) && ks <= l2 + 0.02;
        detail.push(format!("rho={rho}: L2 {l2:.3}, KS {ks:.3}"));
    }
    verdict(
        4,
        pass,
        &format!("{} (L2 in [0.02, 0.10], KS <= L2 + 0.02)", detail.join("; ")),
    );
}

#[test]
fn criterion_5_power_ordering() {
    let alt = [ScenarioId::Roc1, ScenarioId::Roc2];
    let base = experiment(alt, 100, 100, 0.0, DirectionMode::Grid);
    let (l2, ks) = (rate(&base, PsiFunctional::L2), rate(&base, PsiFunctional::Ks));
    let pos = rate(&experiment(alt, 100, 100, 0.5, DirectionMode::Grid), PsiFunctional::L2);
    let neg = rate(&experiment(alt, 100, 100, -0.5, DirectionMode::Grid), PsiFunctional::L2);
    let single = rate(&experiment(alt, 100, 100, 0.0, DirectionMode::Single), PsiFunctional::L2);
    let large = rate(&experiment(alt, 250, 350, 0.0, DirectionMode::Grid), PsiFunctional::L2);
    let checks = [
        ("a", l2 >= ks - 0.05, format!("L2 {l2:.3} >= KS {ks:.3} - 0.05")),
        ("b", pos >= neg - 0.05, format!("rho=0.5 {pos:.3} >= rho=-0.5 {neg:.3} - 0.05")),
        ("c", l2 >= single + 0.05, format!("n_beta=5 {l2:.3} >= single {single:.3} + 0.05")),
        ("d", large >= l2 - 0.05, format!("(250,350) {large:.3} >= (100,100) {l2:.3} - 0.05")),
    ];
    let pass = checks.iter().all(|c| c.1);
    let detail: Vec<String> = checks
        .iter()
        .map(|(id, ok, s)| format!("({id}) {} {s}", if *ok { "ok" } else { "failed" }))
        .collect();
    verdict(5, pass, &detail.join("; "));
}

#[test]
fn criterion_6_projected_and_inverted_curves() {
    // Projected curves of two markers with the same conditional law, and
    // their inverted curves.
    let plan = ExperimentPlan {
        seed: SEED,
        ..ExperimentPlan::new(vec![ScenarioId::Roc1, ScenarioId::Roc1], 2000, 2000, 0.0)
    };
    let study = gen_study(&plan, 0).unwrap();
    let grid = PGrid::default();
    let h = default_roc_bandwidth(4000);
    let set = draw_directions(2, DirectionMode::Paired, 20, SEED).unwrap();
    let mut worst_pair = 0.0f64;
    let mut worst_pair_iroc = 0.0f64;
    for i in 0..set.pairs.len() {
        let pair = set.pair(i);
        let xf = project(&study.diseased.covariates, &pair.beta_f).unwrap();
        let xg = project(&study.healthy.covariates, &pair.beta_g).unwrap();
        let x_f = project_point(&study.x, &pair.beta_f).unwrap();
        let x_g = project_point(&study.x, &pair.beta_g).unwrap();
        let (curves, irocs): (Vec<RocCurve>, Vec<RocCurve>) = (0..2)
            .map(|k| {
                let yf = study.diseased.markers.column(k);
                let yg = study.healthy.markers.column(k);
                let ff = fit_location_scale(&xf, &yf, lscv_bandwidth(&xf, &yf).unwrap()).unwrap();
                let fg = fit_location_scale(&xg, &yg, lscv_bandwidth(&xg, &yg).unwrap()).unwrap();
                let ab = ab_from_fits(&ff, &fg, x_f, x_g).unwrap();
                (
                    estimate_roc_from_residuals(&ff.residuals, &fg.residuals, ab.a, ab.b, h, &grid).unwrap(),
                    iroc_from_samples(&ff, &fg, ab.a, ab.b, &grid).unwrap(),
                )
            })
            .unzip();
        worst_pair = worst_pair.max(curves[0].sup_distance(&curves[1]).unwrap());
        worst_pair_iroc = worst_pair_iroc.max(irocs[0].sup_distance(&irocs[1]).unwrap());
    }

    // Swapping the populations' roles gives the inverted curve; swapping
    // twice gives back the curve.
    let study = binormal_study(2000, SEED).unwrap();
    let xf = study.diseased.covariates.column(0);
    let xg = study.healthy.covariates.column(0);
    let mut worst_iroc = 0.0f64;
    let mut worst_swap = 0.0f64;
    let mut worst_inverse = 0.0f64;
    for k in 0..2 {
        let yf = study.diseased.markers.column(k);
        let yg = study.healthy.markers.column(k);
        let ff = fit_location_scale(&xf, &yf, lscv_bandwidth(&xf, &yf).unwrap()).unwrap();
        let fg = fit_location_scale(&xg, &yg, lscv_bandwidth(&xg, &yg).unwrap()).unwrap();
        let ab = ab_from_fits(&ff, &fg, 0.5, 0.5).unwrap();
        let (sa, sb) = swap_roles(ab.a, ab.b);
        let swapped = plugin_roc(&fg.residuals, &ff.residuals, sa, sb, &grid).unwrap();
        let iroc = iroc_from_samples(&ff, &fg, ab.a, ab.b, &grid).unwrap();
        worst_iroc = worst_iroc.max(swapped.sup_distance(&iroc).unwrap());
        let (a2, b2) = swap_roles(sa, sb);
        let roc = estimate_roc_from_residuals(&ff.residuals, &fg.residuals, ab.a, ab.b, h, &grid).unwrap();
        let back = estimate_roc_from_residuals(&ff.residuals, &fg.residuals, a2, b2, h, &grid).unwrap();
        worst_swap = worst_swap.max(back.sup_distance(&roc).unwrap());
        let (cf, cg) = (
            EmpiricalCdf::new(&ff.residuals).unwrap(),
            EmpiricalCdf::new(&fg.residuals).unwrap(),
        );
        for &q in grid.values() {
            let p = plugin_iroc_at(&cf, &cg, ab.a, ab.b, q);
            worst_inverse = worst_inverse.max((plugin_roc_at(&cf, &cg, ab.a, ab.b, p) - q).abs());
        }
    }
    verdict(
        6,
        worst_pair <= 0.1 && worst_pair_iroc <= 0.1 && worst_iroc <= 1.0 / 2000.0 && worst_swap <= 0.01,
        &format!(
            "identical-law markers over 20 direction pairs: max ROC sup distance {worst_pair:.4}, \
             max IROC sup distance {worst_pair_iroc:.4} (<= 0.1); swapped ROC vs IROC {worst_iroc:.1e} (<= 1/n); \
             double swap {worst_swap:.1e} (<= 0.01); plug-in |ROC(IROC(q)) - q| {worst_inverse:.4} (reported)"
        ),
    );
}

fn cli(args: &[&str]) -> Vec<u8> {
    let o = Command::new(env!("CARGO_BIN_EXE_condroc")).args(args).output().unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    o.stdout
}

#[test]
fn criterion_7_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let h0 = data.join("h0_d2.csv");
    let binormal = data.join("binormal_d1.csv");
    let plan = dir.path().join("plan.toml");
    std::fs::write(
        &plan,
        "scenarios = [\"ROC1\", \"ROC2\"]\nnF = 40\nnG = 50\nrho = 0.5\nB = 20\nn_beta = 2\nreps = 4\nalphas = [0.05, 0.1]\n",
    )
    .unwrap();
    let mut mismatches = Vec::new();
    let mut compared = 0;
    let commands: Vec<(&str, Vec<String>)> = vec![
        (
            "test",
            vec!["test", "--data", h0.to_str().unwrap(), "--x", "0.5,0.6", "--B", "30", "--n-beta", "2", "--seed", "5"]
                .into_iter()
                .map(String::from)
                .collect(),
        ),
        (
            "test-paired",
            vec![
                "test", "--data", h0.to_str().unwrap(), "--x", "0.5,0.6", "--B", "30", "--mode", "paired", "--m-beta", "3",
                "--psi", "ks", "--seed", "5",
            ]
            .into_iter()
            .map(String::from)
            .collect(),
        ),
        (
            "estimate",
            vec!["estimate", "--data", binormal.to_str().unwrap(), "--x", "0.4", "--marker", "2"]
                .into_iter()
                .map(String::from)
                .collect(),
        ),
        (
            "simulate",
            vec!["simulate", "--plan", plan.to_str().unwrap(), "--seed", "3"]
                .into_iter()
                .map(String::from)
                .collect(),
        ),
    ];
    for (name, args) in &commands {
        let mut outputs = Vec::new();
        for (run, threads) in ["1", "1", "4"].iter().enumerate() {
            let out = dir.path().join(format!("{name}-{run}.out"));
            let mut full: Vec<&str> = vec!["--threads", threads];
            full.extend(args.iter().map(|s| s.as_str()));
            full.extend(["--out", out.to_str().unwrap()]);
            cli(&full);
            outputs.push(std::fs::read(&out).unwrap());
        }
        compared += 1;
        if outputs.windows(2).any(|w| w[0] != w[1]) {
            mismatches.push(*name);
        }
    }
    verdict(
        7,
        mismatches.is_empty(),
        &format!("{compared} commands rerun with --threads 1, 1, 4: byte-identical outputs; mismatches: {mismatches:?}"),
    );
}
