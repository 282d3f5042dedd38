use super::directions::DirectionSet;
use crate::interchange::FeatureClasses;
use super::ProfileError;
use crate::interchange::{
    Corpus, FeatureConfig, SegmentalFeature, Side, SpeakerTokens, MIN_TOKENS_PER_CLASS,
};

fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let ss = x.iter().map(|v| (v - m) * (v - m)).sum::<f64>();
    (m, ss / (n - 1.0))
}

/// Sensitivity index between two sets of projections, using sample
/// variances pooled with equal weight.
pub fn dprime(pos: &[f64], neg: &[f64]) -> Result<f64, ProfileError> {
    if pos.len() < 2 || neg.len() < 2 {
        return Err(ProfileError::TooFewTokens { pos: pos.len(), neg: neg.len() });
    }
    let (mp, vp) = mean_var(pos);
    let (mn, vn) = mean_var(neg);
    let sd = ((vp + vn) / 2.0).sqrt();
    if !(sd >= 1e-12) {
        return Err(ProfileError::DegenerateVariance);
    }
    Ok((mp - mn) / sd)
}

/// Projections of a speaker's positive- and negative-class tokens onto `w`
/// (all zero when there is no direction, which still yields the counts).
pub(crate) fn class_projections(
    c: &Corpus,
    speaker: &SpeakerTokens,
    classes: &FeatureClasses,
    w: Option<&[f64]>,
) -> (Vec<f64>, Vec<f64>) {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for ph in speaker.phones() {
        let Some(side) = classes.side_of(&ph.label) else { continue };
        let proj = match w {
            Some(w) => w.iter().zip(c.embedding(ph.row)).map(|(a, &b)| a * b as f64).sum(),
            None => 0.0,
        };
        match side {
            Side::Pos => pos.push(proj),
            Side::Neg => neg.push(proj),
        }
    }
    (pos, neg)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SegmentalResult {
    pub values: [Option<f64>; 9],
    pub counts: [(usize, usize); 9],
    pub warnings: Vec<String>,
}

/// Projects one speaker's tokens onto each feature direction and computes d'
/// where both classes reach the minimum token count.
pub fn segmental_profile(
    c: &Corpus,
    speaker: &SpeakerTokens,
    ds: &DirectionSet,
    fc: &FeatureConfig,
) -> SegmentalResult {
    let mut out = SegmentalResult::default();
    for f in SegmentalFeature::ALL {
        let Some(classes) = fc.classes(f) else { continue };
        let w = ds.direction(f);
        let (pos, neg) = class_projections(c, speaker, classes, w);
        out.counts[f.index()] = (pos.len(), neg.len());
        if pos.len() < MIN_TOKENS_PER_CLASS || neg.len() < MIN_TOKENS_PER_CLASS || w.is_none() {
            continue;
        }
        match dprime(&pos, &neg) {
            Ok(d) => out.values[f.index()] = Some(d),
            Err(e) => out.warnings.push(format!("{f}: {e}")),
        }
    }
    out
}
