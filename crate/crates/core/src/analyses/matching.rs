use serde::{Deserialize, Serialize};

use super::{opt, AnalysisReport, AnalysisError, ReportTable};
use crate::interchange::{Aetiology, Severity};
use crate::profiles::{Measure, ProfileRow, ProfileTable};
use crate::stats::{cohens_d, mann_whitney, mean};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchingParams {
    /// Maximum relative token-count difference: a pair is admitted iff
    /// max/min <= 1 + tolerance.
    pub tolerance: f64,
    pub measure: Measure,
    pub seed: u64,
}

impl Default for MatchingParams {
    fn default() -> Self {
        MatchingParams { tolerance: 0.20, measure: Measure::CompositeConsonant, seed: 0 }
    }
}

/// Greedy one-to-one matching on token count. Candidate pairs are visited
/// in order of |log(a/b)| (ties by index) and kept when neither side is
/// used yet. Returns (index into `a`, index into `b`) pairs.
pub fn greedy_match(a: &[usize], b: &[usize], tolerance: f64) -> Vec<(usize, usize)> {
    let mut cand: Vec<(f64, usize, usize)> = Vec::new();
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            if x == 0 || y == 0 {
                continue;
            }
            let (lo, hi) = (x.min(y) as f64, x.max(y) as f64);
            if hi / lo <= 1.0 + tolerance + 1e-12 {
                cand.push(((x as f64 / y as f64).ln().abs(), i, j));
            }
        }
    }
    cand.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.cmp(&q.1)).then(p.2.cmp(&q.2)));
    let mut used_a = vec![false; a.len()];
    let mut used_b = vec![false; b.len()];
    let mut out = Vec::new();
    for (_, i, j) in cand {
        if !used_a[i] && !used_b[j] {
            used_a[i] = true;
            used_b[j] = true;
            out.push((i, j));
        }
    }
    out
}

/// Compares adjacent severity levels after matching speakers on n_phones.
pub fn token_matched_comparison(
    t: &ProfileTable,
    p: &MatchingParams,
) -> Result<AnalysisReport, AnalysisError> {
    if !(p.tolerance >= 0.0) {
        return Err(AnalysisError::InvalidParameter(format!("tolerance {} must be >= 0", p.tolerance)));
    }
    let mut rep = AnalysisReport::new("token_matched", p.seed);
    rep.param("tolerance", p.tolerance);
    rep.param("measure", p.measure.name());
    let level = |s: Severity| -> Vec<&ProfileRow> {
        let mut v: Vec<&ProfileRow> = t
            .rows
            .iter()
            .filter(|r| r.meta.aetiology != Aetiology::Other && r.meta.severity == s)
            .filter(|r| r.profile.measure(p.measure).is_some() && r.profile.n_phones > 0)
            .collect();
        v.sort_by(|a, b| a.meta.speaker_id.cmp(&b.meta.speaker_id));
        v
    };
    let mut tbl = ReportTable::new(
        "adjacent_levels",
        "comparison",
        ["n_pairs", "cohens_d", "p_value", "mean_lower", "mean_higher", "n_lower", "n_higher"],
    );
    for w in Severity::ORDERED.windows(2) {
        let (lo, hi) = (level(w[0]), level(w[1]));
        let nl: Vec<usize> = lo.iter().map(|r| r.profile.n_phones).collect();
        let nh: Vec<usize> = hi.iter().map(|r| r.profile.n_phones).collect();
        let pairs = greedy_match(&nl, &nh, p.tolerance);
        let label = format!("{} vs {}", w[0], w[1]);
        if pairs.is_empty() {
            rep.finding(format!("{label}: n=0 matched pairs"));
        }
        let a: Vec<f64> = pairs.iter().filter_map(|&(i, _)| lo[i].profile.measure(p.measure)).collect();
        let b: Vec<f64> = pairs.iter().filter_map(|&(_, j)| hi[j].profile.measure(p.measure)).collect();
        tbl.push(
            label,
            [
                Some(pairs.len() as f64),
                opt(cohens_d(&a, &b)),
                opt(mann_whitney(&a, &b).map(|r| r.p_value)),
                (!a.is_empty()).then(|| mean(&a)),
                (!b.is_empty()).then(|| mean(&b)),
                Some(lo.len() as f64),
                Some(hi.len() as f64),
            ],
        );
    }
    rep.tables.push(tbl);
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn greedy_prefers_closest_and_never_reuses() {
        let pairs = greedy_match(&[100, 110, 300], &[105, 100, 1000], 0.2);
        assert_eq!(pairs, vec![(0, 1), (1, 0)]);
        assert!(greedy_match(&[10, 12], &[100, 120], 0.2).is_empty());
        // Exactly at the tolerance boundary is admitted.
        assert_eq!(greedy_match(&[100], &[120], 0.2), vec![(0, 0)]);
        assert!(greedy_match(&[100], &[121], 0.2).is_empty());
    }
}
