//! Bundled synthetic datasets.

use condroc::rng::{domain, stream};
use condroc::simulation::{gen_correlated_errors, gen_study, ExperimentPlan, ScenarioId};
use condroc::{Matrix, Population, PopulationSample, Result, Study};
use rand::Rng;

/// `(a, b)` of the two binormal markers: ROC(p) = Phi(a + b Phi^{-1}(p)).
pub const BINORMAL_MARKERS: [(f64, f64); 2] = [(1.0, 1.0), (0.5, 1.5)];

/// Correlation between the two markers in both synthetic datasets.
pub const SYNTH_RHO: f64 = 0.5;

/// ROC1 twice at `(n, n)`, conditioning point (0.5, 0.6).
pub fn h0_study(n: usize, seed: u64) -> Result<Study> {
    let plan = ExperimentPlan {
        seed,
        ..ExperimentPlan::new(vec![ScenarioId::Roc1, ScenarioId::Roc1], n, n, SYNTH_RHO)
    };
    gen_study(&plan, 0)
}

/// One covariate on [0, 1]; healthy marker k is `x + s(x) e`, diseased is
/// `x + a_k s(x) / b_k + s(x) e / b_k`, with `s(x) = 0.5 + 0.5 x`. Every
/// conditional ROC curve is binormal with the parameters in
/// [`BINORMAL_MARKERS`], whatever the conditioning value.
pub fn binormal_study(n: usize, seed: u64) -> Result<Study> {
    let mut rng = stream(seed, domain::STUDY_DATA, 0);
    let mut population = |label: Population| -> Result<PopulationSample> {
        let x: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let e = gen_correlated_errors(n, 2, SYNTH_RHO, &mut rng)?;
        let mut y = Matrix::zeros(n, 2);
        for (i, &xi) in x.iter().enumerate() {
            let s = 0.5 + 0.5 * xi;
            for (k, &(a, b)) in BINORMAL_MARKERS.iter().enumerate() {
                let v = match label {
                    Population::Healthy => xi + s * e.get(i, k),
                    Population::Diseased => xi + a * s / b + s * e.get(i, k) / b,
                };
                y.set(i, k, v);
            }
        }
        PopulationSample::new(label, Matrix::new(n, 1, x)?, y)
    };
    let diseased = population(Population::Diseased)?;
    let healthy = population(Population::Healthy)?;
    Study::new(diseased, healthy, vec![0.5])
}
