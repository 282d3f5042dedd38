use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{composite_epsilon, severity_pairs, AnalysisError, AnalysisReport, ReportTable};
use crate::profiles::{Measure, ProfileTable};
use crate::stats::spearman;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LodoParams {
    pub measure: Measure,
    pub seed: u64,
}

impl Default for LodoParams {
    fn default() -> Self {
        LodoParams { measure: Measure::CompositeConsonant, seed: 0 }
    }
}

/// Severity correlation and aetiology effect size recomputed with each
/// dataset held out in turn.
pub fn lodo_stability(t: &ProfileTable, p: &LodoParams) -> Result<AnalysisReport, AnalysisError> {
    let datasets: BTreeSet<&str> = t.rows.iter().map(|r| r.meta.dataset.as_str()).collect();
    if datasets.len() < 2 {
        return Err(AnalysisError::SingleDataset(datasets.len()));
    }
    let mut rep = AnalysisReport::new("lodo_stability", p.seed);
    rep.param("measure", p.measure.name());
    let mut folds = ReportTable::new("folds", "held_out", ["n_remaining", "rho", "p_value", "epsilon_squared"]);
    let (mut rhos, mut eps) = (Vec::new(), Vec::new());
    for d in &datasets {
        let rest = || t.rows.iter().filter(|r| r.meta.dataset != *d);
        let (x, y) = severity_pairs(rest(), p.measure);
        let e = composite_epsilon(rest(), p.measure);
        match spearman(&x, &y) {
            Ok(r) => {
                rhos.push(r.statistic);
                if let Some(e) = e {
                    eps.push(e);
                }
                folds.push(*d, [Some(x.len() as f64), Some(r.statistic), Some(r.p_value), e]);
            }
            Err(err) => {
                rep.finding(format!("fold without {d} skipped: {err}"));
                folds.push(*d, [Some(x.len() as f64), None, None, e]);
            }
        }
    }
    let mut summary = ReportTable::new("summary", "statistic", ["min", "mean", "max", "n_folds"]);
    for (name, v) in [("rho", &rhos), ("epsilon_squared", &eps)] {
        if v.is_empty() {
            summary.push(name, [None, None, None, Some(0.0)]);
        } else {
            summary.push(
                name,
                [
                    v.iter().copied().reduce(f64::min),
                    Some(crate::stats::mean(v)),
                    v.iter().copied().reduce(f64::max),
                    Some(v.len() as f64),
                ],
            );
        }
    }
    rep.tables.extend([folds, summary]);
    Ok(rep)
}
