use std::collections::BTreeMap;

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use super::{opt, AnalysisError, AnalysisReport, ReportTable};
use crate::interchange::{Aetiology, Corpus, FeatureConfigs, SegmentalFeature, SpeakerMeta};
use crate::profiles::{class_projections, dprime, estimate_directions_lenient, DirectionSet};
use crate::stats::{kruskal_wallis, spearman};
use crate::{par, rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedTokenParams {
    pub budgets: Vec<usize>,
    pub n_repeats: usize,
    pub seed: u64,
}

impl Default for FixedTokenParams {
    fn default() -> Self {
        FixedTokenParams { budgets: vec![20, 50, 100, 200], n_repeats: 50, seed: 0 }
    }
}

/// Fixed-token consonant d-primes: `values[b][s][f]` for budget `b`,
/// speaker `s` (corpus order) and consonant feature `f`.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedTokenProfiles {
    pub budgets: Vec<usize>,
    pub speakers: Vec<SpeakerMeta>,
    pub values: Vec<Vec<[Option<f64>; 5]>>,
}

impl FixedTokenProfiles {
    /// Mean of the five consonant values; requires all five.
    pub fn composite(&self, budget_index: usize, speaker: usize) -> Option<f64> {
        let v = &self.values[budget_index][speaker];
        let all: Option<Vec<f64>> = v.iter().copied().collect();
        all.map(|x| x.iter().sum::<f64>() / 5.0)
    }
}

/// Recomputes each consonant d' from exactly `budget` tokens per class,
/// sampled without replacement and averaged over `n_repeats` draws.
/// Speakers with fewer tokens than the budget in either class get `None`.
pub fn fixed_token_profiles(
    c: &Corpus,
    fcs: &FeatureConfigs,
    p: &FixedTokenParams,
) -> Result<FixedTokenProfiles, AnalysisError> {
    if p.budgets.is_empty() || p.budgets.iter().any(|&b| b < 5) {
        return Err(AnalysisError::InvalidParameter("budgets must be non-empty and >= 5".into()));
    }
    if p.n_repeats == 0 {
        return Err(AnalysisError::InvalidParameter("n_repeats must be >= 1".into()));
    }
    let mut directions: BTreeMap<&str, DirectionSet> = BTreeMap::new();
    for (lang, fc) in fcs {
        if let Ok(ds) = estimate_directions_lenient(c, lang, fc) {
            directions.insert(lang.as_str(), ds);
        }
    }
    let per_speaker: Vec<Vec<[Option<f64>; 5]>> = par::map_range(c.n_speakers(), |si| {
        let (meta, toks) = c.speaker(si);
        let mut out = vec![[None; 5]; p.budgets.len()];
        let (Some(fc), Some(ds)) = (fcs.get(&meta.language), directions.get(meta.language.as_str())) else {
            return out;
        };
        for (fi, f) in SegmentalFeature::CONSONANT.iter().enumerate() {
            let (Some(classes), Some(w)) = (fc.classes(*f), ds.direction(*f)) else { continue };
            let (pos, neg) = class_projections(c, toks, classes, Some(w));
            for (bi, &b) in p.budgets.iter().enumerate() {
                if pos.len() < b || neg.len() < b {
                    continue;
                }
                let mut sum = 0.0;
                let mut ok = 0usize;
                let mut xp = vec![0.0; b];
                let mut xn = vec![0.0; b];
                for r in 0..p.n_repeats {
                    let keys = [si as u64, fi as u64, r as u64, b as u64];
                    let mut g = rng::stream(p.seed, &keys);
                    for (k, i) in sample(&mut g, pos.len(), b).into_iter().enumerate() {
                        xp[k] = pos[i];
                    }
                    for (k, i) in sample(&mut g, neg.len(), b).into_iter().enumerate() {
                        xn[k] = neg[i];
                    }
                    if let Ok(d) = dprime(&xp, &xn) {
                        sum += d;
                        ok += 1;
                    }
                }
                if ok > 0 {
                    out[bi][fi] = Some(sum / ok as f64);
                }
            }
        }
        out
    });
    let mut values = vec![Vec::with_capacity(c.n_speakers()); p.budgets.len()];
    for s in per_speaker {
        for (bi, v) in s.into_iter().enumerate() {
            values[bi].push(v);
        }
    }
    let ft = FixedTokenProfiles {
        budgets: p.budgets.clone(),
        speakers: c.manifest().speakers.clone(),
        values,
    };
    let any = (0..ft.budgets.len()).any(|bi| (0..ft.speakers.len()).any(|s| ft.composite(bi, s).is_some()));
    if !any {
        return Err(AnalysisError::NoQualifyingSpeakers);
    }
    Ok(ft)
}

fn stats_row(ft: &FixedTokenProfiles, bi: usize, members: &[usize]) -> [Option<f64>; 5] {
    let mut sev = (Vec::new(), Vec::new());
    let mut groups: BTreeMap<Aetiology, Vec<f64>> = BTreeMap::new();
    let mut all = Vec::new();
    for &s in members {
        let Some(v) = ft.composite(bi, s) else { continue };
        let meta = &ft.speakers[s];
        all.push(v);
        if let Some(o) = meta.severity.ordinal() {
            sev.0.push(f64::from(o));
            sev.1.push(v);
        }
        if meta.aetiology != Aetiology::Other {
            groups.entry(meta.aetiology).or_default().push(v);
        }
    }
    let rho = spearman(&sev.0, &sev.1);
    let groups: Vec<Vec<f64>> = groups.into_values().collect();
    let eps = kruskal_wallis(&groups).ok().and_then(|r| r.extra("epsilon_squared"));
    [
        Some(all.len() as f64),
        opt(rho.clone().map(|r| r.statistic)),
        opt(rho.map(|r| r.p_value)),
        eps,
        (!all.is_empty()).then(|| crate::stats::mean(&all)),
    ]
}

/// Severity correlation and aetiology effect size of the fixed-token
/// composite at each budget, for all qualifying speakers and for the
/// common set qualifying at every budget.
pub fn fixed_token_dprime(
    c: &Corpus,
    fcs: &FeatureConfigs,
    p: &FixedTokenParams,
) -> Result<AnalysisReport, AnalysisError> {
    let mut rep = AnalysisReport::new("fixed_token", p.seed);
    rep.param("budgets", &p.budgets);
    rep.param("n_repeats", p.n_repeats);
    let ft = fixed_token_profiles(c, fcs, p)?;
    let n = ft.speakers.len();
    let qualifying: Vec<Vec<usize>> = (0..p.budgets.len())
        .map(|bi| (0..n).filter(|&s| ft.composite(bi, s).is_some()).collect())
        .collect();
    if qualifying.iter().all(Vec::is_empty) {
        return Err(AnalysisError::NoQualifyingSpeakers);
    }
    let common: Vec<usize> =
        (0..n).filter(|&s| (0..p.budgets.len()).all(|bi| ft.composite(bi, s).is_some())).collect();
    rep.finding(format!("{} speakers qualify at every budget", common.len()));

    let cols = ["n_speakers", "rho", "p_value", "epsilon_squared", "mean_composite"];
    let mut all_t = ReportTable::new("budgets", "budget", cols);
    let mut common_t = ReportTable::new("common_set", "budget", cols);
    for (bi, b) in p.budgets.iter().enumerate() {
        all_t.push(b.to_string(), stats_row(&ft, bi, &qualifying[bi]));
        common_t.push(b.to_string(), stats_row(&ft, bi, &common));
    }
    let rhos: Vec<f64> = common_t.column("rho").into_iter().flatten().collect();
    if rhos.len() == p.budgets.len() && !rhos.is_empty() {
        let spread = rhos.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            - rhos.iter().copied().fold(f64::INFINITY, f64::min);
        rep.finding(format!("common-set severity rho varies by {spread:.4} across budgets"));
    }
    rep.tables.extend([all_t, common_t]);
    Ok(rep)
}
