//! Two-population study model, validation and covariate standardization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Which population a sample belongs to: `Diseased` is F, `Healthy` is G.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Population {
    Diseased,
    Healthy,
}

impl Population {
    pub fn name(self) -> &'static str {
        match self {
            Population::Diseased => "diseased",
            Population::Healthy => "healthy",
        }
    }
}

/// Covariates (n x d) and markers (n x K) observed on the same subjects.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationSample {
    pub label: Population,
    pub covariates: Matrix,
    pub markers: Matrix,
}

impl PopulationSample {
    pub fn new(label: Population, covariates: Matrix, markers: Matrix) -> Result<Self> {
        if covariates.nrows() != markers.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "{} sample has {} covariate rows but {} marker rows",
                label.name(),
                covariates.nrows(),
                markers.nrows()
            )));
        }
        Ok(Self {
            label,
            covariates,
            markers,
        })
    }

    pub fn n(&self) -> usize {
        self.covariates.nrows()
    }

    pub fn dim(&self) -> usize {
        self.covariates.ncols()
    }

    pub fn n_markers(&self) -> usize {
        self.markers.ncols()
    }

    fn check(&self) -> Result<()> {
        let name = self.label.name();
        if self.covariates.nrows() != self.markers.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "{name} covariate and marker row counts differ"
            )));
        }
        if self.n() < 2 {
            return Err(Error::TooFewObservations {
                population: name,
                n: self.n(),
            });
        }
        if self.dim() == 0 || self.n_markers() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "{name} sample needs at least one covariate and one marker"
            )));
        }
        if !self.covariates.all_finite() {
            return Err(Error::NonFiniteValue(format!("{name} covariates")));
        }
        if !self.markers.all_finite() {
            return Err(Error::NonFiniteValue(format!("{name} markers")));
        }
        Ok(())
    }

    fn column_range(&self, j: usize) -> (f64, f64) {
        self.covariates
            .rows()
            .map(|r| r[j])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            })
    }
}

/// Diseased and healthy samples plus the conditioning point `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Study {
    pub diseased: PopulationSample,
    pub healthy: PopulationSample,
    pub x: Vec<f64>,
}

impl Study {
    /// Builds and validates a study.
    pub fn new(diseased: PopulationSample, healthy: PopulationSample, x: Vec<f64>) -> Result<Self> {
        validate_study(Self {
            diseased,
            healthy,
            x,
        })
    }

    pub fn dim(&self) -> usize {
        self.diseased.dim()
    }

    pub fn n_markers(&self) -> usize {
        self.diseased.n_markers()
    }
}

/// Checks every study invariant and hands the study back unchanged.
///
/// The support check uses the intersection of the two populations'
/// componentwise covariate boxes.
pub fn validate_study(study: Study) -> Result<Study> {
    study.diseased.check()?;
    study.healthy.check()?;
    let (f, g) = (&study.diseased, &study.healthy);
    if f.dim() != g.dim() {
        return Err(Error::DimensionMismatch(format!(
            "diseased has d = {}, healthy has d = {}",
            f.dim(),
            g.dim()
        )));
    }
    if f.n_markers() != g.n_markers() {
        return Err(Error::DimensionMismatch(format!(
            "diseased has K = {}, healthy has K = {}",
            f.n_markers(),
            g.n_markers()
        )));
    }
    if study.x.len() != f.dim() {
        return Err(Error::DimensionMismatch(format!(
            "conditioning point has length {}, covariates have d = {}",
            study.x.len(),
            f.dim()
        )));
    }
    if study.x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteValue("conditioning point".into()));
    }
    for (j, &value) in study.x.iter().enumerate() {
        let (flo, fhi) = f.column_range(j);
        let (glo, ghi) = g.column_range(j);
        let (lo, hi) = (flo.max(glo), fhi.min(ghi));
        if !(lo <= value && value <= hi) {
            return Err(Error::ConditioningPointOutsideSupport {
                component: j,
                value,
                lo,
                hi,
            });
        }
    }
    Ok(study)
}

/// Per-column location `a` and scale (diagonal of `B`) for `X_s = B^{-1}(X - a)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizationParams {
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
}

/// Pooled (both populations) sample means and n-1 standard deviations.
pub fn fit_standardization(study: &Study) -> Result<StandardizationParams> {
    let d = study.dim();
    let rows: Vec<&[f64]> = study
        .diseased
        .covariates
        .rows()
        .chain(study.healthy.covariates.rows())
        .collect();
    let n = rows.len();
    if n < 2 {
        return Err(Error::TooFewObservations {
            population: "pooled",
            n,
        });
    }
    let mut means = Vec::with_capacity(d);
    let mut sds = Vec::with_capacity(d);
    for j in 0..d {
        let mean = rows.iter().map(|r| r[j]).sum::<f64>() / n as f64;
        let ss: f64 = rows.iter().map(|r| (r[j] - mean).powi(2)).sum();
        let sd = (ss / (n - 1) as f64).sqrt();
        if !(sd > 0.0) {
            return Err(Error::DegenerateCovariate(format!(
                "covariate column {j} is constant"
            )));
        }
        means.push(mean);
        sds.push(sd);
    }
    Ok(StandardizationParams { means, sds })
}

/// Maps every covariate row and the conditioning point to `(v - mean) / sd`.
pub fn apply_standardization(study: &Study, params: &StandardizationParams) -> Result<Study> {
    let d = study.dim();
    if params.means.len() != d || params.sds.len() != d {
        return Err(Error::DimensionMismatch(format!(
            "standardization fitted for d = {}, study has d = {d}",
            params.means.len()
        )));
    }
    let scale = |m: &Matrix| {
        let mut out = m.clone();
        for i in 0..m.nrows() {
            for j in 0..d {
                out.set(i, j, (m.get(i, j) - params.means[j]) / params.sds[j]);
            }
        }
        out
    };
    let x = study
        .x
        .iter()
        .zip(params.means.iter().zip(&params.sds))
        .map(|(&v, (&m, &s))| (v - m) / s)
        .collect();
    Ok(Study {
        diseased: PopulationSample {
            label: study.diseased.label,
            covariates: scale(&study.diseased.covariates),
            markers: study.diseased.markers.clone(),
        },
        healthy: PopulationSample {
            label: study.healthy.label,
            covariates: scale(&study.healthy.covariates),
            markers: study.healthy.markers.clone(),
        },
        x,
    })
}
