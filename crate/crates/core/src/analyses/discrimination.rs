use serde::{Deserialize, Serialize};

use super::{by_aetiology, opt, AnalysisError, AnalysisReport, ReportTable};
use crate::interchange::{Aetiology, Severity};
use crate::profiles::{Feature, Measure, ProfileTable};
use crate::stats::{cohens_d, holm_adjust, kruskal_wallis, mann_whitney};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscriminationParams {
    pub groups: Vec<Aetiology>,
    /// Restrict to one severity level (severity-matched comparison).
    pub severity: Option<Severity>,
    pub seed: u64,
}

impl Default for DiscriminationParams {
    fn default() -> Self {
        DiscriminationParams { groups: Aetiology::MAIN.to_vec(), severity: None, seed: 0 }
    }
}

fn measures() -> Vec<Measure> {
    Feature::ALL
        .iter()
        .map(|f| Measure::Feature(*f))
        .chain([Measure::CompositeConsonant])
        .collect()
}

/// Kruskal-Wallis per feature, pairwise composite comparisons with Holm
/// correction, and the deviation-from-HC effect-size grid.
pub fn aetiology_discrimination(
    t: &ProfileTable,
    p: &DiscriminationParams,
) -> Result<AnalysisReport, AnalysisError> {
    let mut rep = AnalysisReport::new("aetiology_discrimination", p.seed);
    rep.param("groups", &p.groups);
    rep.param("severity", p.severity);

    let rows = t.rows.iter().filter(|r| {
        p.groups.contains(&r.meta.aetiology) && p.severity.is_none_or(|s| r.meta.severity == s)
    });
    let rows: Vec<_> = rows.collect();
    let composite = Measure::CompositeConsonant;
    let comp = by_aetiology(rows.iter().copied(), composite);
    let groups: Vec<Aetiology> = p.groups.iter().copied().filter(|g| comp.contains_key(g)).collect();
    for g in &p.groups {
        match comp.get(g).map_or(0, Vec::len) {
            0 => rep.finding(format!("group {g} has no speakers with {} and is omitted", composite.name())),
            1 => {
                return Err(AnalysisError::GroupTooSmall {
                    group: g.to_string(),
                    measure: composite.name().into(),
                    found: 1,
                })
            }
            _ => {}
        }
    }
    if groups.len() < 2 {
        return Err(AnalysisError::GroupTooSmall {
            group: "(all)".into(),
            measure: composite.name().into(),
            found: groups.len(),
        });
    }

    let mut kw = ReportTable::new("kruskal_wallis", "feature", ["H", "df", "p_value", "epsilon_squared", "N", "k"]);
    for m in measures() {
        let vals = by_aetiology(rows.iter().copied(), m);
        let mut gs = Vec::new();
        for g in &groups {
            match vals.get(g) {
                Some(v) if v.len() >= 2 => gs.push(v.clone()),
                other => rep.finding(format!(
                    "{}: group {g} dropped ({} speakers)",
                    m.name(),
                    other.map_or(0, Vec::len)
                )),
            }
        }
        match kruskal_wallis(&gs) {
            Ok(r) => kw.push(
                m.name(),
                [
                    Some(r.statistic),
                    r.extra("df"),
                    Some(r.p_value),
                    r.extra("epsilon_squared"),
                    Some(r.n as f64),
                    r.extra("k"),
                ],
            ),
            Err(e) => {
                rep.finding(format!("{}: Kruskal-Wallis undefined ({e})", m.name()));
                kw.push(m.name(), [None; 6]);
            }
        }
    }

    let names: Vec<&str> = groups.iter().map(|g| g.as_str()).collect();
    let mut dmat = ReportTable::new("cohens_d_matrix", "group", names.clone());
    for a in &groups {
        dmat.push(a.as_str(), groups.iter().map(|b| if a == b { Some(0.0) } else { opt(cohens_d(&comp[a], &comp[b])) }));
    }

    let mut pairs = Vec::new();
    for (i, a) in groups.iter().enumerate() {
        for b in &groups[i + 1..] {
            pairs.push((*a, *b, mann_whitney(&comp[a], &comp[b])));
        }
    }
    let raw: Vec<f64> = pairs.iter().map(|(_, _, r)| r.as_ref().map_or(1.0, |r| r.p_value)).collect();
    let adj = holm_adjust(&raw);
    let mut pw = ReportTable::new(
        "pairwise",
        "pair",
        ["cohens_d", "U", "p_value", "p_holm", "rank_biserial", "n_a", "n_b"],
    );
    for ((a, b, r), padj) in pairs.iter().zip(&adj) {
        let r = r.as_ref().ok();
        pw.push(
            format!("{a} vs {b}"),
            [
                opt(cohens_d(&comp[a], &comp[b])),
                r.map(|r| r.statistic),
                r.map(|r| r.p_value),
                r.map(|_| *padj),
                r.and_then(|r| r.extra("rank_biserial")),
                Some(comp[a].len() as f64),
                Some(comp[b].len() as f64),
            ],
        );
    }

    let mut tables = vec![kw, dmat, pw];
    if groups.contains(&Aetiology::HC) {
        let cols: Vec<&str> = measures().iter().map(|m| m.name()).collect();
        let mut dev = ReportTable::new("deviation_from_hc", "aetiology", cols);
        let per: Vec<_> = measures().into_iter().map(|m| by_aetiology(rows.iter().copied(), m)).collect();
        for g in groups.iter().filter(|g| **g != Aetiology::HC) {
            dev.push(
                g.as_str(),
                per.iter().map(|v| match (v.get(g), v.get(&Aetiology::HC)) {
                    (Some(a), Some(h)) => opt(cohens_d(a, h)),
                    _ => None,
                }),
            );
        }
        tables.push(dev);
    }
    rep.tables = tables;
    Ok(rep)
}
