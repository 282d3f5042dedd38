use serde::{Deserialize, Serialize};

use super::{AnalysisError, AnalysisReport, ReportTable};
use crate::profiles::{FeatureSubset, ProfileTable};
use crate::stats::{ridge_cv, spearman};

/// Minimum complete rows for the ridge comparison.
pub const MIN_ROWS: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineParams {
    pub k_folds: usize,
    pub lambda: f64,
    pub seed: u64,
}

impl Default for BaselineParams {
    fn default() -> Self {
        BaselineParams { k_folds: 10, lambda: 1.0, seed: 0 }
    }
}

/// Cross-validated ridge prediction of severity from the 13 main features,
/// from those plus the ctc_conf scalar, and from ctc_conf alone.
pub fn baseline_comparison(t: &ProfileTable, p: &BaselineParams) -> Result<AnalysisReport, AnalysisError> {
    if !t.rows.iter().any(|r| r.meta.ctc_conf.is_some()) {
        return Err(AnalysisError::MissingBaselineColumn);
    }
    let mut rep = AnalysisReport::new("baseline_comparison", p.seed);
    rep.param("k_folds", p.k_folds);
    rep.param("lambda", p.lambda);
    rep.param("target", "severity ordinal");

    let rows: Vec<(Vec<f64>, f64, f64)> = t
        .rows
        .iter()
        .filter_map(|r| {
            let x = r.profile.complete(FeatureSubset::Main13)?;
            let c = r.meta.ctc_conf.filter(|c| c.is_finite())?;
            Some((x, c, f64::from(r.meta.severity.ordinal()?)))
        })
        .collect();
    if rows.len() < MIN_ROWS {
        return Err(AnalysisError::InsufficientData { needed: MIN_ROWS, found: rows.len() });
    }
    let y: Vec<f64> = rows.iter().map(|r| r.2).collect();
    let main: Vec<Vec<f64>> = rows.iter().map(|r| r.0.clone()).collect();
    let plus: Vec<Vec<f64>> = rows.iter().map(|r| [r.0.as_slice(), &[r.1]].concat()).collect();
    let alone: Vec<Vec<f64>> = rows.iter().map(|r| vec![r.1]).collect();

    let mut models = ReportTable::new("models", "model", ["rmse", "rho", "n"]);
    for (name, x) in [("main13", &main), ("main13_plus_ctc", &plus), ("ctc_only", &alone)] {
        let r = ridge_cv(x, &y, p.k_folds, p.lambda, p.seed)?;
        models.push(name, [Some(r.rmse), r.spearman_rho, Some(y.len() as f64)]);
    }

    let mut corr = ReportTable::new("ctc_correlations", "feature", ["rho", "p_value", "n"]);
    let features = FeatureSubset::Full15.features();
    for f in features {
        let (a, b): (Vec<f64>, Vec<f64>) = t
            .rows
            .iter()
            .filter_map(|r| Some((r.meta.ctc_conf?, r.profile.get(f)?)))
            .unzip();
        let row = spearman(&a, &b).ok();
        corr.push(f.name(), [row.as_ref().map(|r| r.statistic), row.as_ref().map(|r| r.p_value), Some(a.len() as f64)]);
    }
    rep.tables.extend([models, corr]);
    Ok(rep)
}
