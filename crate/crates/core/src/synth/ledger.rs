use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::SynthError;
use crate::interchange::{Corpus, SegmentalFeature};
use crate::profiles::{Feature, ProfileTable};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerSpeaker {
    pub speaker_id: String,
    pub severity_multiplier: f64,
    pub true_dprime: BTreeMap<SegmentalFeature, f64>,
    /// (pos, neg) token counts as generated.
    pub counts: BTreeMap<SegmentalFeature, (usize, usize)>,
    /// Area of the noise-free corner-vowel triangle.
    pub true_vowel_triangle_area: f64,
}

/// Planted truth for a synthetic corpus, serialized as `ground_truth.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthLedger {
    pub corpus_name: String,
    pub seed: u64,
    pub sigma: f64,
    pub speakers: Vec<LedgerSpeaker>,
}

impl GroundTruthLedger {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("ledger serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, SynthError> {
        serde_json::from_str(text).map_err(|e| SynthError::LedgerMismatch(format!("unreadable ledger: {e}")))
    }

    pub fn speaker(&self, id: &str) -> Option<&LedgerSpeaker> {
        self.speakers.iter().find(|s| s.speaker_id == id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TolerancePolicy {
    /// Allowed deviation in standard errors.
    pub k: f64,
    /// Fraction of cells that must fall within tolerance.
    pub min_fraction: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        TolerancePolicy { k: 4.0, min_fraction: 0.99 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LedgerCheck {
    pub policy: TolerancePolicy,
    pub checked: usize,
    pub within: usize,
    /// Cells with enough tokens whose estimate is nonetheless missing
    /// (degenerate variance).
    pub missing: Vec<(String, SegmentalFeature)>,
    /// (checked, within) per feature.
    pub per_feature: BTreeMap<SegmentalFeature, (usize, usize)>,
    pub max_abs_z: f64,
}

impl LedgerCheck {
    pub fn fraction_within(&self) -> f64 {
        if self.checked == 0 {
            0.0
        } else {
            self.within as f64 / self.checked as f64
        }
    }

    pub fn passed(&self) -> bool {
        self.checked > 0 && self.missing.is_empty() && self.fraction_within() >= self.policy.min_fraction
    }
}

/// Large-sample standard error of d' with `n1` and `n2` tokens per class.
pub(crate) fn dprime_se(d: f64, n1: usize, n2: usize) -> f64 {
    let (a, b) = (n1 as f64, n2 as f64);
    ((a + b) / (a * b) + d * d / (2.0 * (a + b))).sqrt()
}

/// Compares estimated against planted d' for every (speaker, feature) cell
/// that had at least the minimum token count in both classes.
pub fn ledger_check(
    c: &Corpus,
    ledger: &GroundTruthLedger,
    profiles: &ProfileTable,
    policy: TolerancePolicy,
) -> Result<LedgerCheck, SynthError> {
    if c.manifest().corpus_name != ledger.corpus_name {
        return Err(SynthError::LedgerMismatch(format!(
            "corpus {} vs ledger {}",
            c.manifest().corpus_name,
            ledger.corpus_name
        )));
    }
    let mut out = LedgerCheck {
        policy,
        checked: 0,
        within: 0,
        missing: Vec::new(),
        per_feature: BTreeMap::new(),
        max_abs_z: 0.0,
    };
    for row in &profiles.rows {
        let Some(truth) = ledger.speaker(&row.meta.speaker_id) else {
            return Err(SynthError::LedgerMismatch(format!(
                "speaker {} not in ledger",
                row.meta.speaker_id
            )));
        };
        for (&f, &d) in &truth.true_dprime {
            let (n1, n2) = truth.counts[&f];
            if n1.min(n2) < crate::interchange::MIN_TOKENS_PER_CLASS {
                continue;
            }
            let Some(est) = row.profile.get(Feature::from_segmental(f)) else {
                out.missing.push((truth.speaker_id.clone(), f));
                continue;
            };
            let z = (est - d).abs() / dprime_se(d, n1, n2);
            out.max_abs_z = out.max_abs_z.max(z);
            let ok = z <= policy.k;
            out.checked += 1;
            out.within += usize::from(ok);
            let e = out.per_feature.entry(f).or_default();
            e.0 += 1;
            e.1 += usize::from(ok);
        }
    }
    Ok(out)
}
