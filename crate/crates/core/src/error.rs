use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite value in {0}")]
    NonFiniteValue(String),
    #[error("conditioning point component {component} = {value} lies outside the common covariate range [{lo}, {hi}]")]
    ConditioningPointOutsideSupport {
        component: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("too few observations in {population}: {n} (need at least 2)")]
    TooFewObservations { population: &'static str, n: usize },
    #[error("degenerate covariate: {0}")]
    DegenerateCovariate(String),
    #[error("bandwidth {bandwidth} too small: every kernel weight underflows at {point}")]
    BandwidthTooSmall { point: f64, bandwidth: f64 },
    #[error("every candidate bandwidth failed during cross-validation")]
    AllBandwidthsFail,
    #[error("empty sample")]
    EmptySample,
    #[error("curves are defined on different probability grids")]
    GridMismatch,
    #[error("invalid probability grid: {0}")]
    InvalidGrid(String),
    #[error("bootstrap degenerate: {failed} of {requested} replicates failed")]
    BootstrapDegenerate { failed: usize, requested: usize },
    #[error("invalid correlation {rho} for {k} markers (must exceed {bound})")]
    InvalidCorrelation { rho: f64, k: usize, bound: f64 },
    #[error("cannot aggregate an empty set of statistics")]
    EmptyAggregation,
    #[error("at least two markers are required, found {0}")]
    UnsupportedK(usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid experiment plan: {0}")]
    InvalidPlan(String),
}

/// Coarse grouping of errors, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorFamily {
    Validation,
    Estimation,
    Configuration,
}

impl Error {
    pub fn family(&self) -> ErrorFamily {
        match self {
            Error::DimensionMismatch(_)
            | Error::NonFiniteValue(_)
            | Error::ConditioningPointOutsideSupport { .. }
            | Error::TooFewObservations { .. }
            | Error::DegenerateCovariate(_)
            | Error::UnsupportedK(_) => ErrorFamily::Validation,
            Error::BandwidthTooSmall { .. }
            | Error::AllBandwidthsFail
            | Error::EmptySample
            | Error::GridMismatch
            | Error::BootstrapDegenerate { .. }
            | Error::EmptyAggregation => ErrorFamily::Estimation,
            Error::InvalidGrid(_)
            | Error::InvalidCorrelation { .. }
            | Error::InvalidConfig(_)
            | Error::InvalidPlan(_) => ErrorFamily::Configuration,
        }
    }
}
