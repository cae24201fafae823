//! Nonparametric bootstrap comparison of two or more dependent ROC curves
//! conditioned on a (possibly multidimensional) covariate.
//!
//! The multivariate covariate is reduced to one dimension by projecting it
//! onto random directions drawn uniformly from the unit sphere. For every
//! pair of directions (one for the diseased population, one for the healthy
//! population) the conditional ROC curves are estimated through kernel
//! location-scale regression, compared with an L2 or Kolmogorov-Smirnov
//! functional, and calibrated with a joint residual bootstrap.
//!
//! Module map:
//!
//! * [`study`]: two-population samples, validation and covariate standardization.
//! * [`kernel`]: Nadaraya-Watson mean/variance fits and LSCV bandwidths.
//! * [`roc`]: empirical CDFs, the smoothed conditional ROC estimator and oracles.
//! * [`univariate`]: the one-dimensional test (statistic, bootstrap, p-value).
//! * [`projection`]: sphere/torus direction sampling and covariate projection.
//! * [`multivariate`]: the projected test over many direction pairs.
//! * [`simulation`]: simulation scenarios and level/power experiments.

// NaN must fail the `!(a > b)` checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod engine;
pub mod error;
pub mod kernel;
pub mod matrix;
pub mod multivariate;
mod parallel;
pub mod projection;
pub mod quadrature;
pub mod report;
pub mod rng;
pub mod roc;
pub mod simulation;
pub mod study;
pub mod univariate;

pub use error::{Error, ErrorFamily, Result};
pub use matrix::Matrix;
pub use multivariate::{test_md, test_md_with, DirectionMode, MultiTestConfig};
pub use report::TestReport;
pub use roc::{PGrid, RocCurve};
pub use study::{Population, PopulationSample, Study};
pub use univariate::{test_1d, test_1d_with, BandwidthPolicy, PsiFunctional, UniTestConfig};
