//! Comparison of conditional ROC curves given a multivariate covariate,
//! reduced to scalar problems through random projections.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::engine::{EngineConfig, Prepared, Problem};
use crate::error::{Error, Result};
use crate::projection::{project, project_point, sample_sphere, sample_torus_pairs, DirectionPair};
use crate::report::{DirectionPairRecord, TestReport};
use crate::rng::{domain, stream};
use crate::roc::PGrid;
use crate::study::{validate_study, Study};
use crate::univariate::{bootstrap_pvalue, reports, BandwidthPolicy, PsiFunctional};

/// How direction pairs are formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DirectionMode {
    /// `n` directions per population, all `n^2` ordered pairs.
    Grid,
    /// `m` independent pairs.
    Paired,
    /// One pair. Experimental.
    Single,
}

impl fmt::Display for DirectionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DirectionMode::Grid => "grid",
            DirectionMode::Paired => "paired",
            DirectionMode::Single => "single",
        })
    }
}

impl FromStr for DirectionMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "grid" => Ok(DirectionMode::Grid),
            "paired" => Ok(DirectionMode::Paired),
            "single" => Ok(DirectionMode::Single),
            _ => Err(Error::InvalidConfig(format!(
                "unknown direction mode `{s}` (expected grid, paired or single)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiTestConfig {
    pub mode: DirectionMode,
    /// Directions per population in grid mode.
    pub n_beta: usize,
    /// Pairs in paired mode.
    pub m_beta: usize,
    pub b: usize,
    pub psi: PsiFunctional,
    pub grid: PGrid,
    pub seed: u64,
    pub bandwidths: BandwidthPolicy,
    pub h: Option<f64>,
}

impl Default for MultiTestConfig {
    fn default() -> Self {
        Self {
            mode: DirectionMode::Grid,
            n_beta: 5,
            m_beta: 25,
            b: 200,
            psi: PsiFunctional::L2,
            grid: PGrid::default(),
            seed: 0,
            bandwidths: BandwidthPolicy::Lscv,
            h: None,
        }
    }
}

impl MultiTestConfig {
    /// Number of direction pairs this configuration produces.
    pub fn pair_count(&self) -> usize {
        match self.mode {
            DirectionMode::Grid => self.n_beta * self.n_beta,
            DirectionMode::Paired => self.m_beta,
            DirectionMode::Single => 1,
        }
    }
}

/// Directions drawn for one run, with the pair list indexing into them.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionSet {
    pub diseased: Vec<crate::projection::Direction>,
    pub healthy: Vec<crate::projection::Direction>,
    pub pairs: Vec<(usize, usize)>,
}

impl DirectionSet {
    pub fn pair(&self, i: usize) -> DirectionPair {
        let (r, l) = self.pairs[i];
        DirectionPair {
            beta_f: self.diseased[r].clone(),
            beta_g: self.healthy[l].clone(),
        }
    }
}

/// Draws the directions of a run from the seed alone.
pub fn draw_directions(d: usize, mode: DirectionMode, count: usize, seed: u64) -> Result<DirectionSet> {
    if count == 0 {
        return Err(Error::InvalidConfig("direction count must be at least 1".into()));
    }
    let mut rng = stream(seed, domain::DIRECTIONS, 0);
    match mode {
        DirectionMode::Grid => {
            let diseased = sample_sphere(d, count, &mut rng)?;
            let healthy = sample_sphere(d, count, &mut rng)?;
            let pairs = (0..count).flat_map(|r| (0..count).map(move |l| (r, l))).collect();
            Ok(DirectionSet {
                diseased,
                healthy,
                pairs,
            })
        }
        DirectionMode::Paired | DirectionMode::Single => {
            let m = if mode == DirectionMode::Single { 1 } else { count };
            let (diseased, healthy) = sample_torus_pairs(d, m, &mut rng)?
                .into_iter()
                .map(|p| (p.beta_f, p.beta_g))
                .unzip();
            Ok(DirectionSet {
                diseased,
                healthy,
                pairs: (0..m).map(|i| (i, i)).collect(),
            })
        }
    }
}

/// Plain mean of per-pair statistics.
pub fn aggregate_over_pairs(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyAggregation);
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

pub fn md_pvalue(d_s: f64, d_t: &[f64]) -> f64 {
    bootstrap_pvalue(d_s, d_t)
}

pub fn test_md(study: &Study, config: &MultiTestConfig) -> Result<TestReport> {
    Ok(test_md_with(study, config, &[config.psi])?.remove(0))
}

/// Runs the projected bootstrap once and reports each functional in `psis`.
/// `config.psi` is ignored.
pub fn test_md_with(study: &Study, config: &MultiTestConfig, psis: &[PsiFunctional]) -> Result<Vec<TestReport>> {
    let study = validate_study(study.clone())?;
    let count = match config.mode {
        DirectionMode::Grid => config.n_beta,
        DirectionMode::Paired => config.m_beta,
        DirectionMode::Single => 1,
    };
    let directions = draw_directions(study.dim(), config.mode, count, config.seed)?;
    let f_covariates = directions
        .diseased
        .iter()
        .map(|b| project(&study.diseased.covariates, b))
        .collect::<Result<Vec<_>>>()?;
    let g_covariates = directions
        .healthy
        .iter()
        .map(|b| project(&study.healthy.covariates, b))
        .collect::<Result<Vec<_>>>()?;
    let f_x = directions
        .diseased
        .iter()
        .map(|b| project_point(&study.x, b))
        .collect::<Result<Vec<_>>>()?;
    let g_x = directions
        .healthy
        .iter()
        .map(|b| project_point(&study.x, b))
        .collect::<Result<Vec<_>>>()?;
    let records: Vec<DirectionPairRecord> = directions
        .pairs
        .iter()
        .map(|&(r, l)| DirectionPairRecord {
            beta_f: directions.diseased[r].coords().to_vec(),
            beta_g: directions.healthy[l].coords().to_vec(),
            x_f: f_x[r],
            x_g: g_x[l],
        })
        .collect();
    let problem = Problem {
        f_covariates,
        f_x,
        g_covariates,
        g_x,
        pairs: directions.pairs.clone(),
        f_markers: &study.diseased.markers,
        g_markers: &study.healthy.markers,
    };
    if let BandwidthPolicy::Fixed(g) = config.bandwidths {
        if !(g > 0.0 && g.is_finite()) {
            return Err(Error::InvalidConfig(format!("fixed bandwidth must be positive, got {g}")));
        }
    }
    let engine = EngineConfig {
        b: config.b,
        grid: &config.grid,
        seed: config.seed,
        bandwidths: &config.bandwidths,
        h: config.h,
    };
    let prepared = Prepared::new(problem, &engine)?;
    let outcome = prepared.run(&engine, psis)?;
    let mut out = reports(outcome, psis, config.seed, config.b);
    for report in &mut out {
        report.mode = Some(config.mode);
        report.directions = records.clone();
        report.diagnostics.experimental = config.mode == DirectionMode::Single;
    }
    Ok(out)
}
