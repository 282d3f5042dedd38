use std::collections::BTreeMap;

use super::{AnalysisError, AnalysisReport, ReportTable};
use crate::interchange::{Aetiology, Severity};
use crate::profiles::{Feature, Measure, ProfileTable};
use crate::stats::{mean, residualize};

fn ordering<K: Copy + Ord>(means: &BTreeMap<K, f64>) -> Vec<K> {
    let mut v: Vec<(K, f64)> = means.iter().map(|(k, m)| (*k, *m)).collect();
    v.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    v.into_iter().map(|x| x.0).collect()
}

fn group_means<K: Copy + Ord>(keys: &[K], values: &[f64]) -> BTreeMap<K, f64> {
    let mut by: BTreeMap<K, Vec<f64>> = BTreeMap::new();
    for (k, v) in keys.iter().zip(values) {
        by.entry(*k).or_default().push(*v);
    }
    by.into_iter().map(|(k, v)| (k, mean(&v))).collect()
}

/// Regresses every feature on log(n_phones) and checks whether severity and
/// aetiology orderings of the group means survive.
pub fn residualized_rankings(t: &ProfileTable) -> Result<AnalysisReport, AnalysisError> {
    let mut rep = AnalysisReport::new("residualized_rankings", 0);
    rep.param("regressor", "ln(n_phones)");
    let measures: Vec<Measure> = Feature::ALL
        .iter()
        .map(|f| Measure::Feature(*f))
        .chain([Measure::CompositeConsonant])
        .collect();
    let mut verdict = ReportTable::new(
        "preservation",
        "feature",
        ["n", "severity_order_preserved", "aetiology_order_preserved"],
    );
    let sev_cols: Vec<String> = Severity::ORDERED
        .iter()
        .flat_map(|s| [format!("{s}_raw"), format!("{s}_residual")])
        .collect();
    let aet_cols: Vec<String> = Aetiology::MAIN
        .iter()
        .flat_map(|a| [format!("{a}_raw"), format!("{a}_residual")])
        .collect();
    let mut sev_t = ReportTable::new("severity_means", "feature", sev_cols);
    let mut aet_t = ReportTable::new("aetiology_means", "feature", aet_cols);

    for m in measures {
        let rows: Vec<_> = t
            .rows
            .iter()
            .filter(|r| r.profile.n_phones > 0)
            .filter_map(|r| Some((r, r.profile.measure(m)?)))
            .collect();
        let y: Vec<f64> = rows.iter().map(|x| x.1).collect();
        let x: Vec<f64> = rows.iter().map(|x| (x.0.profile.n_phones as f64).ln()).collect();
        let resid = match residualize(&y, &x) {
            Ok(r) => r,
            Err(e) => {
                rep.finding(format!("{}: not residualized ({e})", m.name()));
                verdict.push(m.name(), [Some(y.len() as f64), None, None]);
                sev_t.push(m.name(), vec![None; sev_t.columns.len()]);
                aet_t.push(m.name(), vec![None; aet_t.columns.len()]);
                continue;
            }
        };
        let sev_idx: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].0.meta.severity.ordinal().is_some()).collect();
        let sev_keys: Vec<Severity> = sev_idx.iter().map(|&i| rows[i].0.meta.severity).collect();
        let sev_raw = group_means(&sev_keys, &sev_idx.iter().map(|&i| y[i]).collect::<Vec<_>>());
        let sev_res = group_means(&sev_keys, &sev_idx.iter().map(|&i| resid[i]).collect::<Vec<_>>());
        let aet_idx: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].0.meta.aetiology != Aetiology::Other).collect();
        let aet_keys: Vec<Aetiology> = aet_idx.iter().map(|&i| rows[i].0.meta.aetiology).collect();
        let aet_raw = group_means(&aet_keys, &aet_idx.iter().map(|&i| y[i]).collect::<Vec<_>>());
        let aet_res = group_means(&aet_keys, &aet_idx.iter().map(|&i| resid[i]).collect::<Vec<_>>());

        let sev_ok = ordering(&sev_raw) == ordering(&sev_res);
        let aet_ok = ordering(&aet_raw) == ordering(&aet_res);
        if !sev_ok {
            rep.finding(format!("{}: severity ordering changes after residualization", m.name()));
        }
        if !aet_ok {
            rep.finding(format!("{}: aetiology ordering changes after residualization", m.name()));
        }
        let flag = |b: bool| Some(f64::from(u8::from(b)));
        verdict.push(m.name(), [Some(y.len() as f64), flag(sev_ok), flag(aet_ok)]);
        sev_t.push(
            m.name(),
            Severity::ORDERED.iter().flat_map(|s| [sev_raw.get(s).copied(), sev_res.get(s).copied()]),
        );
        aet_t.push(
            m.name(),
            Aetiology::MAIN.iter().flat_map(|a| [aet_raw.get(a).copied(), aet_res.get(a).copied()]),
        );
    }
    rep.tables.extend([verdict, sev_t, aet_t]);
    Ok(rep)
}
