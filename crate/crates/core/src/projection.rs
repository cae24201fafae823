//! Random directions on the unit sphere and covariate projections.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Unit vector in `R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Direction(Vec<f64>);

impl Direction {
    /// Normalizes `coords`; fails on the zero vector.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::DimensionMismatch("direction must have at least one component".into()));
        }
        if coords.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue("direction".into()));
        }
        let norm = coords.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidConfig("direction must be nonzero".into()));
        }
        Ok(Self(coords.into_iter().map(|v| v / norm).collect()))
    }

    pub fn basis(d: usize, i: usize) -> Self {
        let mut coords = vec![0.0; d];
        coords[i] = 1.0;
        Self(coords)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|v| -v).collect())
    }

    pub fn dot(&self, x: &[f64]) -> f64 {
        self.0.iter().zip(x).map(|(b, v)| b * v).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionPair {
    pub beta_f: Direction,
    pub beta_g: Direction,
}

fn draw<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Direction {
    loop {
        let z: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        if let Ok(dir) = Direction::new(z) {
            return dir;
        }
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::InvalidConfig("dimension must be at least 1".into()));
    }
    Ok(())
}

/// `count` independent uniform directions on the unit sphere of `R^d`.
pub fn sample_sphere<R: Rng + ?Sized>(d: usize, count: usize, rng: &mut R) -> Result<Vec<Direction>> {
    check_dim(d)?;
    Ok((0..count).map(|_| draw(d, rng)).collect())
}

/// `count` independent pairs; each pair draws its diseased direction first.
pub fn sample_torus_pairs<R: Rng + ?Sized>(d: usize, count: usize, rng: &mut R) -> Result<Vec<DirectionPair>> {
    check_dim(d)?;
    Ok((0..count)
        .map(|_| {
            let beta_f = draw(d, rng);
            let beta_g = draw(d, rng);
            DirectionPair { beta_f, beta_g }
        })
        .collect())
}

/// Inner product of every row with `beta`.
pub fn project(covariates: &Matrix, beta: &Direction) -> Result<Vec<f64>> {
    if covariates.ncols() != beta.dim() {
        return Err(Error::DimensionMismatch(format!(
            "covariates have {} columns, direction has {}",
            covariates.ncols(),
            beta.dim()
        )));
    }
    Ok(covariates.rows().map(|r| beta.dot(r)).collect())
}

pub fn project_point(x: &[f64], beta: &Direction) -> Result<f64> {
    if x.len() != beta.dim() {
        return Err(Error::DimensionMismatch(format!(
            "point has {} components, direction has {}",
            x.len(),
            beta.dim()
        )));
    }
    Ok(beta.dot(x))
}
