//! The experiment suite. Every analysis reads a [`ProfileTable`] (or a
//! corpus, for fixed-token d') and returns an [`AnalysisReport`].

mod backbone;
mod classifier;
mod crosslingual;
mod discrimination;
mod fixed_token;
mod lodo;
mod matching;
mod report;
mod residual;
mod ridge;
mod severity;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::interchange::{Aetiology, Severity};
use crate::profiles::{Measure, ProfileRow, ProfileTable};
use crate::stats::StatsError;

pub use backbone::{backbone_agreement, BackboneParams};
pub use classifier::{centroid_classifier_lodo, nearest_centroid_lodo, ClassifierOutcome, ClassifierParams, LabeledPoint};
pub use crosslingual::{crosslingual_consistency, CrosslingualParams};
pub use discrimination::{aetiology_discrimination, DiscriminationParams};
pub use fixed_token::{fixed_token_dprime, fixed_token_profiles, FixedTokenParams, FixedTokenProfiles};
pub use lodo::{lodo_stability, LodoParams};
pub use matching::{greedy_match, token_matched_comparison, MatchingParams};
pub use report::{AnalysisReport, ReportTable};
pub use residual::residualized_rankings;
pub use ridge::{baseline_comparison, BaselineParams};
pub use severity::{severity_gradient, SeverityParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("intelligibility {0} outside [0, 100]")]
    OutOfRange(f64),
    #[error("need at least 2 severity levels with 3 or more speakers, found {0}")]
    InsufficientSeverityLevels(usize),
    #[error("group {group} has {found} speakers with {measure}, need 2")]
    GroupTooSmall { group: String, measure: String, found: usize },
    #[error("no aetiology has two languages meeting min_n={min_n} and min_hc={min_hc}")]
    NoQualifyingLanguagePair { min_n: usize, min_hc: usize },
    #[error("no two backbones share {needed} or more speakers")]
    NoSharedSpeakers { needed: usize },
    #[error("no speaker has enough tokens for any budget")]
    NoQualifyingSpeakers,
    #[error("leave-one-dataset-out needs at least 2 datasets, found {0}")]
    SingleDataset(usize),
    #[error("fold holding out {0} leaves no training rows")]
    ClassAbsentFromAllTraining(String),
    #[error("no row carries ctc_conf")]
    MissingBaselineColumn,
    #[error("need at least {needed} complete rows, found {found}")]
    InsufficientData { needed: usize, found: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

/// Severity category from intelligibility percentage.
pub fn stipancic_map(intelligibility_pct: f64) -> Result<Severity, AnalysisError> {
    let p = intelligibility_pct;
    if !(0.0..=100.0).contains(&p) {
        return Err(AnalysisError::OutOfRange(p));
    }
    Ok(if p > 94.0 {
        Severity::Control
    } else if p >= 85.0 {
        Severity::Mild
    } else if p >= 70.0 {
        Severity::Moderate
    } else {
        Severity::Severe
    })
}

/// Replaces the severity of every row carrying an intelligibility
/// percentage with its Stipancic category; returns how many rows changed.
pub fn apply_severity_override(t: &mut ProfileTable) -> Result<usize, AnalysisError> {
    let mut changed = 0;
    for r in &mut t.rows {
        if let Some(p) = r.meta.intelligibility_pct {
            let s = stipancic_map(p)?;
            changed += usize::from(s != r.meta.severity);
            r.meta.severity = s;
        }
    }
    Ok(changed)
}

/// Canonical analysis identifiers, as accepted by `phonoscope analyze`.
pub const ANALYSIS_IDS: [&str; 10] = [
    "severity_gradient",
    "aetiology_discrimination",
    "crosslingual",
    "backbone_agreement",
    "fixed_token",
    "token_matched",
    "lodo_stability",
    "centroid_classifier",
    "residualized_rankings",
    "baseline_comparison",
];

/// Maps long-form aliases to the canonical id.
pub fn canonical_id(id: &str) -> Option<&'static str> {
    let id = match id {
        "crosslingual_consistency" => "crosslingual",
        "fixed_token_dprime" => "fixed_token",
        "token_matched_comparison" => "token_matched",
        "centroid_classifier_lodo" => "centroid_classifier",
        other => other,
    };
    ANALYSIS_IDS.iter().copied().find(|x| *x == id)
}

pub(crate) fn opt<E>(r: Result<f64, E>) -> Option<f64> {
    r.ok().filter(|v| v.is_finite())
}

/// (severity ordinal, value) pairs with both present.
pub(crate) fn severity_pairs<'a>(
    rows: impl Iterator<Item = &'a ProfileRow>,
    m: Measure,
) -> (Vec<f64>, Vec<f64>) {
    rows.filter_map(|r| Some((f64::from(r.meta.severity.ordinal()?), r.profile.measure(m)?)))
        .unzip()
}

/// Values of `m` per main aetiology present, in canonical group order.
pub(crate) fn by_aetiology<'a>(
    rows: impl Iterator<Item = &'a ProfileRow>,
    m: Measure,
) -> BTreeMap<Aetiology, Vec<f64>> {
    let mut out: BTreeMap<Aetiology, Vec<f64>> = BTreeMap::new();
    for r in rows.filter(|r| r.meta.aetiology != Aetiology::Other) {
        if let Some(v) = r.profile.measure(m) {
            out.entry(r.meta.aetiology).or_default().push(v);
        }
    }
    out
}

/// Kruskal-Wallis epsilon-squared of `m` across the main groups with at
/// least one value.
pub(crate) fn composite_epsilon<'a>(rows: impl Iterator<Item = &'a ProfileRow>, m: Measure) -> Option<f64> {
    let groups: Vec<Vec<f64>> = by_aetiology(rows, m).into_values().collect();
    crate::stats::kruskal_wallis(&groups).ok()?.extra("epsilon_squared")
}

/// Whether `means` (in severity order) are strictly decreasing.
pub(crate) fn strictly_decreasing(means: &[f64]) -> bool {
    means.len() >= 2 && means.windows(2).all(|w| w[1] < w[0])
}

/// Means of `m` for each severity level with at least `min_count` speakers.
pub(crate) fn severity_means<'a>(
    rows: impl Iterator<Item = &'a ProfileRow>,
    m: Measure,
    min_count: usize,
) -> Vec<(Severity, usize, f64)> {
    let mut by: BTreeMap<Severity, Vec<f64>> = BTreeMap::new();
    for r in rows {
        if r.meta.severity.ordinal().is_some() {
            if let Some(v) = r.profile.measure(m) {
                by.entry(r.meta.severity).or_default().push(v);
            }
        }
    }
    Severity::ORDERED
        .iter()
        .filter_map(|s| {
            let v = by.get(s)?;
            (v.len() >= min_count).then(|| (*s, v.len(), crate::stats::mean(v)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stipancic_thresholds() {
        assert_eq!(stipancic_map(95.0), Ok(Severity::Control));
        assert_eq!(stipancic_map(94.0), Ok(Severity::Mild));
        assert_eq!(stipancic_map(94.0001), Ok(Severity::Control));
        assert_eq!(stipancic_map(90.0), Ok(Severity::Mild));
        assert_eq!(stipancic_map(85.0), Ok(Severity::Mild));
        assert_eq!(stipancic_map(84.9), Ok(Severity::Moderate));
        assert_eq!(stipancic_map(75.0), Ok(Severity::Moderate));
        assert_eq!(stipancic_map(70.0), Ok(Severity::Moderate));
        assert_eq!(stipancic_map(69.99), Ok(Severity::Severe));
        assert_eq!(stipancic_map(60.0), Ok(Severity::Severe));
        assert_eq!(stipancic_map(0.0), Ok(Severity::Severe));
        assert_eq!(stipancic_map(100.0), Ok(Severity::Control));
        assert_eq!(stipancic_map(101.0), Err(AnalysisError::OutOfRange(101.0)));
        assert!(stipancic_map(-0.5).is_err());
        assert!(stipancic_map(f64::NAN).is_err());
    }

    #[test]
    fn aliases() {
        assert_eq!(canonical_id("crosslingual_consistency"), Some("crosslingual"));
        assert_eq!(canonical_id("severity_gradient"), Some("severity_gradient"));
        assert_eq!(canonical_id("nope"), None);
    }
}
