use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::{severity_means, strictly_decreasing, AnalysisError, AnalysisReport, ReportTable};
use crate::interchange::Aetiology;
use crate::profiles::{FeatureSubset, Measure, ProfileTable};
use crate::stats::{cosine, spearman};

/// Minimum speakers two backbones must share to be compared.
pub const MIN_SHARED: usize = 10;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BackboneParams {
    /// Backbone the per-aetiology profiles are compared against; defaults
    /// to the first in name order.
    pub reference: Option<String>,
    pub seed: u64,
}

fn mean_profiles(t: &ProfileTable) -> BTreeMap<Aetiology, Vec<f64>> {
    let mut acc: BTreeMap<Aetiology, (Vec<f64>, usize)> = BTreeMap::new();
    for r in t.rows.iter().filter(|r| r.meta.aetiology != Aetiology::Other) {
        if let Some(v) = r.profile.complete(FeatureSubset::Consonant5) {
            let e = acc.entry(r.meta.aetiology).or_insert_with(|| (vec![0.0; 5], 0));
            for (a, x) in e.0.iter_mut().zip(v) {
                *a += x;
            }
            e.1 += 1;
        }
    }
    acc.into_iter()
        .map(|(a, (s, n))| (a, s.into_iter().map(|x| x / n as f64).collect()))
        .collect()
}

/// Agreement between backbones: composite rank correlation over shared
/// speakers, per-aetiology profile cosine against a reference, and each
/// backbone's severity-gradient monotonicity.
pub fn backbone_agreement(
    tables: &BTreeMap<String, ProfileTable>,
    p: &BackboneParams,
) -> Result<AnalysisReport, AnalysisError> {
    let mut rep = AnalysisReport::new("backbone_agreement", p.seed);
    let names: Vec<&String> = tables.keys().collect();
    let reference = p.reference.clone().or_else(|| names.first().map(|s| s.to_string()));
    rep.param("backbones", &names);
    rep.param("reference", &reference);
    if names.len() < 2 {
        return Err(AnalysisError::NoSharedSpeakers { needed: MIN_SHARED });
    }
    let reference = reference.unwrap_or_default();
    let Some(ref_table) = tables.get(&reference) else {
        return Err(AnalysisError::InvalidParameter(format!("unknown reference backbone {reference}")));
    };

    let composite: BTreeMap<&str, HashMap<&str, f64>> = tables
        .iter()
        .map(|(b, t)| {
            let m = t
                .rows
                .iter()
                .filter_map(|r| Some((r.meta.speaker_id.as_str(), r.profile.composite_consonant()?)))
                .collect();
            (b.as_str(), m)
        })
        .collect();

    let mut rho = ReportTable::new("composite_rho", "pair", ["rho", "p_value", "n_shared"]);
    let mut compared = 0;
    for (i, a) in names.iter().enumerate() {
        for b in &names[i + 1..] {
            let (ca, cb) = (&composite[a.as_str()], &composite[b.as_str()]);
            let mut shared: Vec<&str> = ca.keys().filter(|k| cb.contains_key(*k)).copied().collect();
            shared.sort_unstable();
            let label = format!("{a} vs {b}");
            if shared.len() < MIN_SHARED {
                rep.finding(format!("{label}: only {} shared speakers, skipped", shared.len()));
                rho.push(label, [None, None, Some(shared.len() as f64)]);
                continue;
            }
            compared += 1;
            let x: Vec<f64> = shared.iter().map(|s| ca[s]).collect();
            let y: Vec<f64> = shared.iter().map(|s| cb[s]).collect();
            match spearman(&x, &y) {
                Ok(r) => rho.push(label, [Some(r.statistic), Some(r.p_value), Some(shared.len() as f64)]),
                Err(e) => {
                    rep.finding(format!("{label}: {e}"));
                    rho.push(label, [None, None, Some(shared.len() as f64)]);
                }
            }
        }
    }
    if compared == 0 {
        return Err(AnalysisError::NoSharedSpeakers { needed: MIN_SHARED });
    }

    let ref_profiles = mean_profiles(ref_table);
    let others: Vec<&String> = names.iter().copied().filter(|n| **n != reference).collect();
    let mut cos = ReportTable::new("profile_cosine", "aetiology", others.iter().map(|s| s.as_str()));
    let other_profiles: Vec<_> = others.iter().map(|b| mean_profiles(&tables[*b])).collect();
    for (a, rv) in &ref_profiles {
        cos.push(
            a.as_str(),
            other_profiles.iter().map(|op| op.get(a).and_then(|v| cosine(rv, v).ok())),
        );
    }

    let mut mono = ReportTable::new("severity_monotone", "backbone", ["monotone", "n_levels"]);
    for (b, t) in tables {
        let means = severity_means(t.rows.iter(), Measure::CompositeConsonant, 3);
        let seq: Vec<f64> = means.iter().map(|m| m.2).collect();
        mono.push(b.as_str(), [Some(f64::from(u8::from(strictly_decreasing(&seq)))), Some(seq.len() as f64)]);
    }
    rep.tables.extend([rho, cos, mono]);
    Ok(rep)
}
