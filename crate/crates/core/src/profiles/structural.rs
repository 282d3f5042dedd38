use std::collections::BTreeMap;

use crate::interchange::{Corpus, FeatureConfig, SpeakerTokens};

/// Tokens required of each corner vowel for the triangle area.
pub const MIN_CORNER_TOKENS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StructuralMetrics {
    pub boundary_sharpness: Option<f64>,
    pub cross_position_cos: Option<f64>,
    pub vowel_triangle_area: Option<f64>,
}

fn to_f64(row: &[f32]) -> Vec<f64> {
    row.iter().map(|&x| x as f64).collect()
}

fn unit(row: &[f32]) -> Option<Vec<f64>> {
    let v = to_f64(row);
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    (n > 0.0 && n.is_finite()).then(|| v.into_iter().map(|x| x / n).collect())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Boundary sharpness, cross-position cosine and vowel triangle area.
///
/// Tokens with an all-zero embedding have no direction and are left out of
/// the two cosine-based metrics.
pub fn structural_metrics(
    c: &Corpus,
    speaker: &SpeakerTokens,
    fc: Option<&FeatureConfig>,
) -> StructuralMetrics {
    let mut out = StructuralMetrics::default();

    let mut dist_sum = 0.0;
    let mut n_pairs = 0usize;
    for utt in &speaker.utterances {
        let units: Vec<Option<Vec<f64>>> =
            utt.phones.iter().map(|p| unit(c.embedding(p.row))).collect();
        for pair in units.windows(2) {
            if let (Some(a), Some(b)) = (&pair[0], &pair[1]) {
                dist_sum += 1.0 - dot(a, b);
                n_pairs += 1;
            }
        }
    }
    if n_pairs > 0 {
        out.boundary_sharpness = Some(dist_sum / n_pairs as f64);
    }

    // Mean pairwise cosine within a label from the sum of unit vectors:
    // sum_{i != j} u_i.u_j = |sum u|^2 - n.
    let mut by_label: BTreeMap<&str, (Vec<f64>, usize)> = BTreeMap::new();
    for ph in speaker.phones() {
        let Some(u) = unit(c.embedding(ph.row)) else { continue };
        let e = by_label.entry(&ph.label).or_insert_with(|| (vec![0.0; u.len()], 0));
        for (a, x) in e.0.iter_mut().zip(&u) {
            *a += x;
        }
        e.1 += 1;
    }
    let per_label: Vec<f64> = by_label
        .values()
        .filter(|(_, n)| *n >= 2)
        .map(|(s, n)| {
            let n = *n as f64;
            ((dot(s, s) - n) / (n * (n - 1.0))).clamp(-1.0, 1.0)
        })
        .collect();
    if !per_label.is_empty() {
        out.cross_position_cos = Some(per_label.iter().sum::<f64>() / per_label.len() as f64);
    }

    if let Some(fc) = fc {
        let means: Option<Vec<Vec<f64>>> = fc
            .vowel_corners
            .iter()
            .map(|v| corner_mean(c, speaker, v))
            .collect();
        if let Some(m) = means {
            out.vowel_triangle_area = Some(triangle_area(&m[0], &m[1], &m[2]));
        }
    }
    out
}

fn corner_mean(c: &Corpus, speaker: &SpeakerTokens, label: &str) -> Option<Vec<f64>> {
    let mut sum = vec![0.0; c.dim()];
    let mut n = 0usize;
    for ph in speaker.phones().filter(|p| &*p.label == label) {
        for (a, &x) in sum.iter_mut().zip(c.embedding(ph.row)) {
            *a += x as f64;
        }
        n += 1;
    }
    (n >= MIN_CORNER_TOKENS).then(|| sum.into_iter().map(|x| x / n as f64).collect())
}

/// Area of the triangle with vertices `a`, `i`, `u` in any dimension.
pub(crate) fn triangle_area(a: &[f64], i: &[f64], u: &[f64]) -> f64 {
    let e1: Vec<f64> = i.iter().zip(a).map(|(x, y)| x - y).collect();
    let e2: Vec<f64> = u.iter().zip(a).map(|(x, y)| x - y).collect();
    let g = dot(&e1, &e1) * dot(&e2, &e2) - dot(&e1, &e2).powi(2);
    0.5 * g.max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_right_triangle() {
        let z = [0.0, 0.0, 0.0];
        assert_eq!(triangle_area(&z, &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]), 0.5);
        assert_eq!(triangle_area(&z, &[2.0, 0.0, 0.0], &[4.0, 0.0, 0.0]), 0.0);
    }

    #[test]
    fn triangle_area_matches_heron() {
        let a = [0.3, -1.0, 2.0, 0.5];
        let i = [1.1, 0.4, -0.2, 0.0];
        let u = [-0.7, 0.9, 1.0, 2.2];
        let d = |p: &[f64], q: &[f64]| p.iter().zip(q).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        let (x, y, z) = (d(&a, &i), d(&i, &u), d(&u, &a));
        let s = (x + y + z) / 2.0;
        let heron = (s * (s - x) * (s - y) * (s - z)).sqrt();
        assert!((triangle_area(&a, &i, &u) - heron).abs() < 1e-12);
    }
}
