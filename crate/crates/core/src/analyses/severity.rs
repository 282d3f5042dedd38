use serde::{Deserialize, Serialize};

use super::{opt, severity_means, strictly_decreasing, AnalysisError, AnalysisReport, ReportTable};
use crate::interchange::{Aetiology, SeveritySource};
use crate::profiles::{Measure, ProfileRow, ProfileTable};
use crate::rng;
use crate::stats::{bootstrap_ci, bootstrap_mean_ci, spearman, BootstrapConfig, StatsError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeverityParams {
    pub measure: Measure,
    /// Bootstrap resamples; 0 skips the confidence intervals.
    pub n_boot: usize,
    pub seed: u64,
    /// Stratify the correlation bootstrap by token-count quartile.
    pub stratify_by_token_quartile: bool,
    /// Keep only rows whose severity came from these sources.
    pub sources: Option<Vec<SeveritySource>>,
    pub aetiologies: Option<Vec<Aetiology>>,
}

impl Default for SeverityParams {
    fn default() -> Self {
        SeverityParams {
            measure: Measure::CompositeConsonant,
            n_boot: 1000,
            seed: 0,
            stratify_by_token_quartile: true,
            sources: None,
            aetiologies: None,
        }
    }
}

/// Quartile (0..4) of each entry by rank, ties broken by position, so the
/// four strata are as equal in size as possible.
pub(crate) fn token_quartiles(n_phones: &[usize]) -> Vec<usize> {
    let n = n_phones.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (n_phones[i], i));
    let mut q = vec![0; n];
    for (rank, &i) in order.iter().enumerate() {
        q[i] = 4 * rank / n.max(1);
    }
    q
}

struct Obs {
    ord: f64,
    value: f64,
}

fn rho_of(sample: &[&Obs]) -> Option<f64> {
    let x: Vec<f64> = sample.iter().map(|o| o.ord).collect();
    let y: Vec<f64> = sample.iter().map(|o| o.value).collect();
    spearman(&x, &y).ok().map(|r| r.statistic)
}

/// Per-severity means, the severity correlation with a bootstrap CI, a
/// monotonicity verdict, and the correlation within token-count quartiles.
pub fn severity_gradient(t: &ProfileTable, p: &SeverityParams) -> Result<AnalysisReport, AnalysisError> {
    let mut rep = AnalysisReport::new("severity_gradient", p.seed);
    rep.param("measure", p.measure.name());
    rep.param("n_boot", p.n_boot);
    rep.param("stratify_by_token_quartile", p.stratify_by_token_quartile);
    rep.param("sources", &p.sources);
    rep.param("aetiologies", &p.aetiologies);

    let rows: Vec<&ProfileRow> = t
        .rows
        .iter()
        .filter(|r| r.meta.aetiology != Aetiology::Other || p.aetiologies.is_some())
        .filter(|r| p.sources.as_ref().is_none_or(|s| s.contains(&r.meta.severity_source)))
        .filter(|r| p.aetiologies.as_ref().is_none_or(|a| a.contains(&r.meta.aetiology)))
        .filter(|r| r.meta.severity.ordinal().is_some() && r.profile.measure(p.measure).is_some())
        .collect();

    let levels = severity_means(rows.iter().copied(), p.measure, 1);
    let usable = levels.iter().filter(|(_, n, _)| *n >= 3).count();
    if usable < 2 {
        return Err(AnalysisError::InsufficientSeverityLevels(usable));
    }

    let mut means = ReportTable::new("levels", "severity", ["n", "mean", "ci_lower", "ci_upper"]);
    for (s, n, m) in &levels {
        let values: Vec<f64> = rows
            .iter()
            .filter(|r| r.meta.severity == *s)
            .filter_map(|r| r.profile.measure(p.measure))
            .collect();
        let ci = (p.n_boot > 0)
            .then(|| {
                let cfg = BootstrapConfig::new(p.n_boot, rng::derive(p.seed, &[u64::from(s.ordinal().unwrap_or(9))]));
                bootstrap_mean_ci(&values, &cfg).ok()
            })
            .flatten();
        means.push(s.as_str(), [Some(*n as f64), Some(*m), ci.map(|c| c.lower), ci.map(|c| c.upper)]);
    }
    let seq: Vec<f64> = levels.iter().filter(|(_, n, _)| *n >= 3).map(|(_, _, m)| *m).collect();
    let monotone = strictly_decreasing(&seq);
    rep.finding(format!(
        "means over levels with >= 3 speakers are {}strictly decreasing",
        if monotone { "" } else { "not " }
    ));

    let obs: Vec<Obs> = rows
        .iter()
        .map(|r| Obs {
            ord: f64::from(r.meta.severity.ordinal().unwrap_or(0)),
            value: r.profile.measure(p.measure).unwrap_or(f64::NAN),
        })
        .collect();
    let n_phones: Vec<usize> = rows.iter().map(|r| r.profile.n_phones).collect();
    let quartile = token_quartiles(&n_phones);

    let mut corr = ReportTable::new(
        "correlation",
        "statistic",
        ["rho", "p_value", "n", "ci_lower", "ci_upper", "monotone"],
    );
    let (x, y): (Vec<f64>, Vec<f64>) = obs.iter().map(|o| (o.ord, o.value)).unzip();
    match spearman(&x, &y) {
        Ok(r) => {
            let ci = if p.n_boot > 0 {
                let cfg = BootstrapConfig::new(p.n_boot, rng::derive(p.seed, &[rng::key_of("rho")]));
                let strata = p.stratify_by_token_quartile.then_some(quartile.as_slice());
                match bootstrap_ci(&obs, |s: &[&Obs]| rho_of(s), &cfg, strata) {
                    Ok(ci) => Some(ci),
                    Err(e) => {
                        rep.finding(format!("bootstrap CI unavailable: {e}"));
                        None
                    }
                }
            } else {
                None
            };
            corr.push(
                "spearman",
                [
                    Some(r.statistic),
                    Some(r.p_value),
                    Some(r.n as f64),
                    ci.map(|c| c.lower),
                    ci.map(|c| c.upper),
                    Some(f64::from(u8::from(monotone))),
                ],
            );
            if let Some(ci) = ci {
                rep.finding(format!(
                    "rho = {:.3} [{:.3}, {:.3}]{}",
                    r.statistic,
                    ci.lower,
                    ci.upper,
                    if ci.excludes(0.0) { ", CI excludes 0" } else { "" }
                ));
            }
        }
        Err(StatsError::ConstantInput) => {
            rep.finding("ConstantInput: values or severities are constant, no rho");
            corr.push("spearman", [None, None, Some(x.len() as f64), None, None, Some(f64::from(u8::from(monotone)))]);
        }
        Err(e) => return Err(e.into()),
    }

    let mut quart = ReportTable::new("token_quartiles", "quartile", ["n", "min_phones", "max_phones", "rho", "p_value"]);
    for q in 0..4 {
        let idx: Vec<usize> = (0..obs.len()).filter(|&i| quartile[i] == q).collect();
        if idx.is_empty() {
            continue;
        }
        let qx: Vec<f64> = idx.iter().map(|&i| obs[i].ord).collect();
        let qy: Vec<f64> = idx.iter().map(|&i| obs[i].value).collect();
        let r = spearman(&qx, &qy);
        let lo = idx.iter().map(|&i| n_phones[i]).min().unwrap_or(0);
        let hi = idx.iter().map(|&i| n_phones[i]).max().unwrap_or(0);
        quart.push(
            format!("Q{}", q + 1),
            [
                Some(idx.len() as f64),
                Some(lo as f64),
                Some(hi as f64),
                opt(r.clone().map(|r| r.statistic)),
                opt(r.map(|r| r.p_value)),
            ],
        );
    }

    rep.tables.extend([means, corr, quart]);
    Ok(rep)
}

