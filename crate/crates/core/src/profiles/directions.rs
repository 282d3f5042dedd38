use std::collections::BTreeMap;

use serde::Serialize;

use super::ProfileError;
use crate::interchange::{Aetiology, Corpus, FeatureConfig, SegmentalFeature, Side};
use crate::par;

/// Unit feature directions estimated from the healthy controls of one language.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirectionSet {
    pub language: String,
    pub directions: BTreeMap<SegmentalFeature, Vec<f64>>,
    pub hc_speaker_count: usize,
    /// (pos, neg) pooled HC token counts per configured feature.
    pub hc_token_counts: BTreeMap<SegmentalFeature, (usize, usize)>,
    /// Configured features left without a direction, with the reason.
    pub skipped: BTreeMap<SegmentalFeature, String>,
}

impl DirectionSet {
    pub fn direction(&self, f: SegmentalFeature) -> Option<&[f64]> {
        self.directions.get(&f).map(Vec::as_slice)
    }
}

struct Sums {
    pos: Vec<f64>,
    neg: Vec<f64>,
    n_pos: usize,
    n_neg: usize,
}

/// Strict variant: any feature whose HC class is empty is an error.
pub fn estimate_directions(
    c: &Corpus,
    lang: &str,
    fc: &FeatureConfig,
) -> Result<DirectionSet, ProfileError> {
    let ds = estimate_directions_lenient(c, lang, fc)?;
    for f in ds.skipped.keys() {
        let (p, n) = ds.hc_token_counts[f];
        if p == 0 || n == 0 {
            return Err(ProfileError::EmptyFeatureClass(*f));
        }
        return Err(ProfileError::DegenerateDirection(*f));
    }
    Ok(ds)
}

/// Like [`estimate_directions`], but features that cannot be estimated are
/// recorded in `skipped` instead of failing the whole language.
pub fn estimate_directions_lenient(
    c: &Corpus,
    lang: &str,
    fc: &FeatureConfig,
) -> Result<DirectionSet, ProfileError> {
    let hc: Vec<usize> = (0..c.n_speakers())
        .filter(|&i| {
            let (meta, toks) = c.speaker(i);
            meta.aetiology == Aetiology::HC && meta.language == lang && toks.n_phones() > 0
        })
        .collect();
    if hc.is_empty() {
        return Err(ProfileError::NoHealthyControls(lang.to_owned()));
    }
    let dim = c.dim();
    let features: Vec<SegmentalFeature> = fc.features.keys().copied().collect();

    // Per-speaker partial sums, combined in speaker order so the result does
    // not depend on scheduling.
    let partials: Vec<Vec<Sums>> = par::map_slice(&hc, |&si| {
        let (_, toks) = c.speaker(si);
        features
            .iter()
            .map(|f| {
                let classes = &fc.features[f];
                let mut s = Sums { pos: vec![0.0; dim], neg: vec![0.0; dim], n_pos: 0, n_neg: 0 };
                for ph in toks.phones() {
                    let (acc, n) = match classes.side_of(&ph.label) {
                        Some(Side::Pos) => (&mut s.pos, &mut s.n_pos),
                        Some(Side::Neg) => (&mut s.neg, &mut s.n_neg),
                        None => continue,
                    };
                    for (a, &x) in acc.iter_mut().zip(c.embedding(ph.row)) {
                        *a += x as f64;
                    }
                    *n += 1;
                }
                s
            })
            .collect()
    });

    let mut ds = DirectionSet {
        language: lang.to_owned(),
        directions: BTreeMap::new(),
        hc_speaker_count: hc.len(),
        hc_token_counts: BTreeMap::new(),
        skipped: BTreeMap::new(),
    };
    for (fi, f) in features.iter().enumerate() {
        let mut total = Sums { pos: vec![0.0; dim], neg: vec![0.0; dim], n_pos: 0, n_neg: 0 };
        for p in &partials {
            let s = &p[fi];
            total.n_pos += s.n_pos;
            total.n_neg += s.n_neg;
            for d in 0..dim {
                total.pos[d] += s.pos[d];
                total.neg[d] += s.neg[d];
            }
        }
        ds.hc_token_counts.insert(*f, (total.n_pos, total.n_neg));
        if total.n_pos == 0 || total.n_neg == 0 {
            ds.skipped.insert(*f, "a class has no healthy-control tokens".into());
            continue;
        }
        let diff: Vec<f64> = (0..dim)
            .map(|d| total.pos[d] / total.n_pos as f64 - total.neg[d] / total.n_neg as f64)
            .collect();
        let norm = diff.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm >= 1e-12) {
            ds.skipped.insert(*f, "class means coincide".into());
            continue;
        }
        ds.directions.insert(*f, diff.into_iter().map(|x| x / norm).collect());
    }
    Ok(ds)
}
