//! Statistical kernel: rank tests, effect sizes, multiple-comparison
//! correction, bootstrap, and regression.
//!
//! Missing values are encoded as non-finite `f64` (NaN) and removed inside
//! each call by pairwise deletion; `TestResult::n` reports the count that
//! survived deletion.

mod bootstrap;
mod descriptive;
mod effect;
mod rank;
mod regression;
pub mod special;

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

pub use bootstrap::{bootstrap_ci, bootstrap_mean_ci, BootstrapConfig, ConfidenceInterval};
pub use descriptive::{mean, pearson, quantile_sorted, sample_sd, sample_variance};
pub use effect::{cohens_d, cosine, epsilon_squared, holm_adjust};
pub use rank::{
    average_ranks, kruskal_wallis, ks_uniform, mann_whitney, mann_whitney_with, spearman,
    PValueMethod, EXACT_MAX_N,
};
pub use regression::{residualize, ridge_cv, RidgeCvResult};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("too few complete pairs ({0})")]
    TooFewPairs(usize),
    #[error("input is constant")]
    ConstantInput,
    #[error("group {0} is empty")]
    EmptyGroup(usize),
    #[error("need at least 2 groups, found {0}")]
    TooFewGroups(usize),
    #[error("need at least {needed} observations, found {found}")]
    TooFewObservations { needed: usize, found: usize },
    #[error("pooled standard deviation is zero")]
    DegenerateVariance,
    #[error("pooled standard deviation is zero")]
    DegeneratePooledSD,
    #[error("zero-length vector")]
    ZeroVector,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("statistic undefined on resample {0} after 10 redraws")]
    StatisticUndefinedOnResample(usize),
    #[error("singular linear system")]
    SingularSystem,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = StatsError> = std::result::Result<T, E>;

/// Statistic, p-value, post-deletion sample size, and named extras
/// (effect sizes, degrees of freedom, flags).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
    pub extras: BTreeMap<String, f64>,
}

impl TestResult {
    pub fn extra(&self, key: &str) -> Option<f64> {
        self.extras.get(key).copied()
    }
}

/// Drops non-finite values.
pub fn finite(values: &[f64]) -> Vec<f64> {
    values.iter().copied().filter(|v| v.is_finite()).collect()
}
