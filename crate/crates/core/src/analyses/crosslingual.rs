use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{AnalysisError, AnalysisReport, ReportTable};
use crate::interchange::Aetiology;
use crate::profiles::{FeatureSubset, ProfileTable};
use crate::stats::{bootstrap_ci, cosine, BootstrapConfig};
use crate::{par, rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrosslingualParams {
    pub min_n: usize,
    /// Bootstrap resamples; 0 skips the confidence intervals.
    pub n_boot: usize,
    /// Label permutations; 0 skips the permutation test.
    pub n_perm: usize,
    pub min_hc: usize,
    pub seed: u64,
    pub aetiologies: Vec<Aetiology>,
    pub min_n_sweep: Vec<usize>,
    pub min_hc_sweep: Vec<usize>,
}

impl Default for CrosslingualParams {
    fn default() -> Self {
        CrosslingualParams {
            min_n: 10,
            n_boot: 1000,
            n_perm: 1000,
            min_hc: 1,
            seed: 0,
            aetiologies: Aetiology::MAIN[1..].to_vec(),
            min_n_sweep: vec![1, 5, 10, 20, 30],
            min_hc_sweep: vec![1, 5, 10, 20],
        }
    }
}

struct Data {
    languages: Vec<String>,
    lang: Vec<usize>,
    profile: Vec<Vec<f64>>,
    labels: Vec<Aetiology>,
    hc_count: Vec<usize>,
}

impl Data {
    fn qualifying(&self, labels: &[Aetiology], aet: Aetiology, min_n: usize, min_hc: usize) -> Vec<usize> {
        let mut counts = vec![0usize; self.languages.len()];
        for (i, l) in labels.iter().enumerate() {
            if *l == aet {
                counts[self.lang[i]] += 1;
            }
        }
        (0..self.languages.len())
            .filter(|&l| counts[l] >= min_n.max(1) && self.hc_count[l] >= min_hc)
            .collect()
    }

    /// Pairwise cosines of per-language mean profiles over `langs`, using
    /// the rows in `members`.
    fn pair_cosines(&self, members: &[usize], langs: &[usize]) -> Option<Vec<(usize, usize, f64)>> {
        let dim = self.profile.first()?.len();
        let mut sums: BTreeMap<usize, (Vec<f64>, usize)> =
            langs.iter().map(|&l| (l, (vec![0.0; dim], 0))).collect();
        for &i in members {
            if let Some((s, n)) = sums.get_mut(&self.lang[i]) {
                for (a, x) in s.iter_mut().zip(&self.profile[i]) {
                    *a += x;
                }
                *n += 1;
            }
        }
        let means: Vec<(usize, Vec<f64>)> = sums
            .into_iter()
            .map(|(l, (s, n))| (l, s.into_iter().map(|x| x / n as f64).collect()))
            .collect();
        let mut out = Vec::new();
        for (i, (la, a)) in means.iter().enumerate() {
            for (lb, b) in &means[i + 1..] {
                out.push((*la, *lb, cosine(a, b).ok()?));
            }
        }
        Some(out)
    }

    fn mean_cosine(&self, labels: &[Aetiology], aet: Aetiology, langs: &[usize]) -> Option<f64> {
        let members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == aet).collect();
        let c = self.pair_cosines(&members, langs)?;
        (!c.is_empty()).then(|| c.iter().map(|x| x.2).sum::<f64>() / c.len() as f64)
    }
}

fn summary(c: &[(usize, usize, f64)]) -> (f64, f64, f64) {
    let v: Vec<f64> = c.iter().map(|x| x.2).collect();
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (mean, min, max)
}

/// Cosine similarity of mean consonant profiles of each aetiology across
/// languages, with bootstrap CIs, a within-language label-permutation null,
/// and sweeps over the minimum-n and minimum-HC thresholds.
pub fn crosslingual_consistency(
    t: &ProfileTable,
    p: &CrosslingualParams,
) -> Result<AnalysisReport, AnalysisError> {
    let mut rep = AnalysisReport::new("crosslingual", p.seed);
    rep.param("min_n", p.min_n);
    rep.param("min_hc", p.min_hc);
    rep.param("n_boot", p.n_boot);
    rep.param("n_perm", p.n_perm);
    rep.param("aetiologies", &p.aetiologies);
    rep.param("min_n_sweep", &p.min_n_sweep);
    rep.param("min_hc_sweep", &p.min_hc_sweep);

    let languages = t.languages();
    let lang_idx: BTreeMap<&str, usize> =
        languages.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let mut data = Data {
        hc_count: languages.iter().map(|l| t.hc_speaker_count(l)).collect(),
        languages: languages.clone(),
        lang: Vec::new(),
        profile: Vec::new(),
        labels: Vec::new(),
    };
    for r in t.rows.iter().filter(|r| r.meta.aetiology != Aetiology::Other) {
        if let Some(v) = r.profile.complete(FeatureSubset::Consonant5) {
            data.lang.push(lang_idx[r.meta.language.as_str()]);
            data.profile.push(v);
            data.labels.push(r.meta.aetiology);
        }
    }

    let qual: Vec<(Aetiology, Vec<usize>)> = p
        .aetiologies
        .iter()
        .map(|&a| (a, data.qualifying(&data.labels, a, p.min_n, p.min_hc)))
        .collect();
    if qual.iter().all(|(_, l)| l.len() < 2) {
        return Err(AnalysisError::NoQualifyingLanguagePair { min_n: p.min_n, min_hc: p.min_hc });
    }

    let observed: Vec<Option<f64>> = qual
        .iter()
        .map(|(a, langs)| if langs.len() >= 2 { data.mean_cosine(&data.labels, *a, langs) } else { None })
        .collect();

    // Permutation null: shuffle aetiology labels within each language.
    let by_lang: Vec<Vec<usize>> = (0..languages.len())
        .map(|l| (0..data.lang.len()).filter(|&i| data.lang[i] == l).collect())
        .collect();
    let null: Vec<Vec<Option<f64>>> = par::map_range(p.n_perm, |i| {
        let mut r = rng::stream(p.seed, &[rng::key_of("perm"), i as u64]);
        let mut labels = data.labels.clone();
        for idx in &by_lang {
            let mut l: Vec<Aetiology> = idx.iter().map(|&k| labels[k]).collect();
            l.shuffle(&mut r);
            for (&k, v) in idx.iter().zip(l) {
                labels[k] = v;
            }
        }
        qual.iter()
            .map(|(a, langs)| if langs.len() >= 2 { data.mean_cosine(&labels, *a, langs) } else { None })
            .collect()
    });

    let mut cons = ReportTable::new(
        "consistency",
        "aetiology",
        ["n_languages", "mean_cosine", "min_cosine", "max_cosine", "ci_lower", "ci_upper", "perm_p"],
    );
    let mut pairs_t = ReportTable::new("pairs", "pair", ["cosine", "n_a", "n_b"]);
    for (k, (a, langs)) in qual.iter().enumerate() {
        if langs.len() < 2 {
            cons.push(a.as_str(), [Some(langs.len() as f64), None, None, None, None, None, None]);
            continue;
        }
        let members: Vec<usize> = (0..data.labels.len())
            .filter(|&i| data.labels[i] == *a && langs.contains(&data.lang[i]))
            .collect();
        let Some(pairs) = data.pair_cosines(&members, langs) else {
            rep.finding(format!("{a}: a language mean profile is the zero vector"));
            cons.push(a.as_str(), [Some(langs.len() as f64), None, None, None, None, None, None]);
            continue;
        };
        let (mean, min, max) = summary(&pairs);
        let ci = if p.n_boot > 0 {
            let strata: Vec<usize> = members.iter().map(|&i| data.lang[i]).collect();
            let cfg = BootstrapConfig::new(p.n_boot, rng::derive(p.seed, &[rng::key_of("boot"), k as u64]));
            let stat = |s: &[&usize]| {
                let idx: Vec<usize> = s.iter().map(|&&i| i).collect();
                let c = data.pair_cosines(&idx, langs)?;
                Some(c.iter().map(|x| x.2).sum::<f64>() / c.len() as f64)
            };
            match bootstrap_ci(&members, stat, &cfg, Some(&strata)) {
                Ok(ci) => Some(ci),
                Err(e) => {
                    rep.finding(format!("{a}: bootstrap CI unavailable ({e})"));
                    None
                }
            }
        } else {
            None
        };
        let perm_p = (p.n_perm > 0).then(|| {
            let obs = observed[k].unwrap_or(mean);
            let ge = null.iter().filter(|n| n[k].is_some_and(|v| v >= obs)).count();
            (1 + ge) as f64 / (1 + p.n_perm) as f64
        });
        cons.push(
            a.as_str(),
            [
                Some(langs.len() as f64),
                Some(mean),
                Some(min),
                Some(max),
                ci.map(|c| c.lower),
                ci.map(|c| c.upper),
                perm_p,
            ],
        );
        for (la, lb, c) in &pairs {
            let count = |l: usize| members.iter().filter(|&&i| data.lang[i] == l).count() as f64;
            pairs_t.push(
                format!("{a}: {}-{}", languages[*la], languages[*lb]),
                [Some(*c), Some(count(*la)), Some(count(*lb))],
            );
        }
    }

    let sweep_cols: Vec<String> = p
        .aetiologies
        .iter()
        .flat_map(|a| [format!("{a}_mean_cosine"), format!("{a}_n_languages")])
        .collect();
    let sweep = |name: &str, label: &str, values: &[usize], min_n_of: &dyn Fn(usize) -> (usize, usize)| {
        let mut tbl = ReportTable::new(name, label, sweep_cols.clone());
        for &v in values {
            let (min_n, min_hc) = min_n_of(v);
            let mut cells = Vec::new();
            for a in &p.aetiologies {
                let langs = data.qualifying(&data.labels, *a, min_n, min_hc);
                let m = if langs.len() >= 2 { data.mean_cosine(&data.labels, *a, &langs) } else { None };
                cells.push(m);
                cells.push(Some(langs.len() as f64));
            }
            tbl.push(v.to_string(), cells);
        }
        tbl
    };
    let n_sweep = sweep("min_n_sweep", "min_n", &p.min_n_sweep, &|v| (v, p.min_hc));
    let hc_sweep = sweep("min_hc_sweep", "min_hc", &p.min_hc_sweep, &|v| (p.min_n, v));
    rep.tables.extend([cons, pairs_t, n_sweep, hc_sweep]);
    Ok(rep)
}
