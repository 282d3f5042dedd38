//! Percentile bootstrap with optional stratification.
//!
//! Resample `i` draws from `rng::stream(seed, [i])`, so bounds are identical
//! whatever the thread count.

use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;

use super::descriptive::{mean, quantile_sorted};
use super::{finite, Result, StatsError};
use crate::par;
use crate::rng;

const MAX_REDRAWS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BootstrapConfig {
    pub n_resamples: usize,
    pub level: f64,
    pub seed: u64,
}

impl BootstrapConfig {
    pub fn new(n_resamples: usize, seed: u64) -> Self {
        BootstrapConfig {
            n_resamples,
            level: 0.95,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConfidenceInterval {
    /// Statistic on the original sample, when defined.
    pub estimate: Option<f64>,
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    pub n_resamples: usize,
    pub seed: u64,
}

impl ConfidenceInterval {
    pub fn excludes(&self, value: f64) -> bool {
        value < self.lower || value > self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Bootstraps `statistic` over `rows`. With `strata`, each stratum is
/// resampled with replacement to its own size.
pub fn bootstrap_ci<T, F>(
    rows: &[T],
    statistic: F,
    cfg: &BootstrapConfig,
    strata: Option<&[usize]>,
) -> Result<ConfidenceInterval>
where
    T: Sync,
    F: Fn(&[&T]) -> Option<f64> + Sync + Send,
{
    if cfg.n_resamples < 100 {
        return Err(StatsError::InvalidArgument(format!(
            "n_resamples must be at least 100, got {}",
            cfg.n_resamples
        )));
    }
    if !(cfg.level > 0.0 && cfg.level < 1.0) {
        return Err(StatsError::InvalidArgument(format!("level {} outside (0, 1)", cfg.level)));
    }
    if rows.is_empty() {
        return Err(StatsError::TooFewObservations { needed: 1, found: 0 });
    }
    let groups: Vec<Vec<usize>> = match strata {
        Some(labels) => {
            if labels.len() != rows.len() {
                return Err(StatsError::LengthMismatch(labels.len(), rows.len()));
            }
            let mut by: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for (i, &s) in labels.iter().enumerate() {
                by.entry(s).or_default().push(i);
            }
            by.into_values().collect()
        }
        None => vec![(0..rows.len()).collect()],
    };

    let all: Vec<&T> = rows.iter().collect();
    let estimate = statistic(&all);

    let draws: Vec<Result<f64>> = par::map_range(cfg.n_resamples, |i| {
        let mut r = rng::stream(cfg.seed, &[i as u64]);
        let mut sample: Vec<&T> = Vec::with_capacity(rows.len());
        for _ in 0..=MAX_REDRAWS {
            sample.clear();
            for g in &groups {
                for _ in 0..g.len() {
                    sample.push(&rows[g[r.gen_range(0..g.len())]]);
                }
            }
            if let Some(v) = statistic(&sample).filter(|v| v.is_finite()) {
                return Ok(v);
            }
        }
        Err(StatsError::StatisticUndefinedOnResample(i))
    });
    let mut values = draws.into_iter().collect::<Result<Vec<f64>>>()?;
    values.sort_by(f64::total_cmp);
    let alpha = 1.0 - cfg.level;
    Ok(ConfidenceInterval {
        estimate,
        lower: quantile_sorted(&values, alpha / 2.0),
        upper: quantile_sorted(&values, 1.0 - alpha / 2.0),
        level: cfg.level,
        n_resamples: cfg.n_resamples,
        seed: cfg.seed,
    })
}

/// Bootstrap CI of the mean of `values` (missing values dropped).
pub fn bootstrap_mean_ci(values: &[f64], cfg: &BootstrapConfig) -> Result<ConfidenceInterval> {
    let v = finite(values);
    bootstrap_ci(
        &v,
        |s: &[&f64]| Some(s.iter().copied().sum::<f64>() / s.len() as f64),
        cfg,
        None,
    )
    .map(|mut ci| {
        ci.estimate = Some(mean(&v));
        ci
    })
}
