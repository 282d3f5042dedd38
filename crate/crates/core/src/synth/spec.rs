use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::SynthError;
use crate::interchange::{Aetiology, SegmentalFeature, Severity, SeveritySource};

/// Log-normal token-count distribution for each feature class of a speaker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TokenDist {
    /// Median tokens per class.
    pub median: f64,
    /// Standard deviation of log counts.
    pub log_sd: f64,
    /// Counts below this are raised to it.
    #[serde(default)]
    pub min: usize,
    /// Standard deviation of a per-speaker log factor shared by all of the
    /// speaker's classes (how much speech a speaker contributed overall).
    #[serde(default)]
    pub speaker_log_sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellSpec {
    pub aetiology: Aetiology,
    pub severity: Severity,
    pub speakers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    pub name: String,
    pub language: String,
    #[serde(default = "default_source")]
    pub severity_source: SeveritySource,
    pub cells: Vec<CellSpec>,
}

fn default_source() -> SeveritySource {
    SeveritySource::Clinical
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthSpec {
    pub seed: u64,
    pub dim: usize,
    pub backbones: Vec<String>,
    /// Healthy class separation per feature (missing = 2.0).
    pub delta: BTreeMap<SegmentalFeature, f64>,
    pub sigma: f64,
    /// Per-aetiology, per-feature multiplier on the separation (missing = 1.0).
    pub collapse: BTreeMap<Aetiology, BTreeMap<SegmentalFeature, f64>>,
    /// Severity multiplier on every separation, including the vowel corners.
    pub severity_multipliers: BTreeMap<Severity, f64>,
    pub tokens: TokenDist,
    /// Token counts are scaled by exp(-slope * severity ordinal); 0 disables
    /// the count/severity confound.
    pub token_severity_slope: f64,
    /// Standard deviation of the per-speaker embedding offset.
    pub speaker_offset_sd: f64,
    /// Distance of the /i/ and /u/ corner means from /a/ in healthy speech.
    pub corner_separation: f64,
    /// Probability that an inter-word gap is a pause, per severity.
    pub pause_prob: BTreeMap<Severity, f64>,
    pub phones_per_utterance: usize,
    pub datasets: Vec<DatasetSpec>,
}

impl Default for SynthSpec {
    fn default() -> Self {
        use Aetiology::*;
        use SegmentalFeature as F;
        let template = |c: [f64; 5]| {
            let mut m: BTreeMap<SegmentalFeature, f64> =
                F::CONSONANT.iter().copied().zip(c).collect();
            for f in F::VOWEL {
                m.insert(f, 0.85);
            }
            m
        };
        let collapse = BTreeMap::from([
            (PD, template([0.5, 0.9, 0.8, 0.7, 0.9])),
            (CP, template([0.9, 0.5, 0.8, 0.8, 0.7])),
            (ALS, template([0.6, 0.7, 0.5, 0.9, 0.6])),
            (DS, template([0.8, 0.8, 0.9, 0.5, 0.8])),
            (Stroke, template([0.9, 0.7, 0.7, 0.8, 0.5])),
        ]);
        let cells = |hc: usize, rest: &[(Aetiology, Severity, usize)]| {
            let mut v = vec![CellSpec { aetiology: HC, severity: Severity::Control, speakers: hc }];
            v.extend(rest.iter().map(|&(aetiology, severity, speakers)| CellSpec {
                aetiology,
                severity,
                speakers,
            }));
            v
        };
        SynthSpec {
            seed: 0,
            dim: 16,
            backbones: vec!["synth-base".into()],
            delta: BTreeMap::new(),
            sigma: 1.0,
            collapse,
            severity_multipliers: BTreeMap::from([
                (Severity::Control, 1.0),
                (Severity::Mild, 0.8),
                (Severity::Moderate, 0.6),
                (Severity::Severe, 0.4),
                (Severity::Unknown, 1.0),
            ]),
            tokens: TokenDist { median: 40.0, log_sd: 0.3, min: 6, speaker_log_sd: 0.0 },
            token_severity_slope: 0.0,
            speaker_offset_sd: 0.5,
            corner_separation: 2.0,
            pause_prob: BTreeMap::from([
                (Severity::Control, 0.1),
                (Severity::Mild, 0.2),
                (Severity::Moderate, 0.35),
                (Severity::Severe, 0.5),
                (Severity::Unknown, 0.2),
            ]),
            phones_per_utterance: 24,
            datasets: vec![
                DatasetSpec {
                    name: "synth_en".into(),
                    language: "en".into(),
                    severity_source: SeveritySource::Clinical,
                    cells: cells(
                        16,
                        &[
                            (PD, Severity::Mild, 6),
                            (PD, Severity::Moderate, 6),
                            (PD, Severity::Severe, 6),
                            (ALS, Severity::Moderate, 6),
                            (CP, Severity::Moderate, 6),
                        ],
                    ),
                },
                DatasetSpec {
                    name: "synth_es".into(),
                    language: "es".into(),
                    severity_source: SeveritySource::Threshold,
                    cells: cells(
                        12,
                        &[
                            (PD, Severity::Mild, 6),
                            (PD, Severity::Severe, 6),
                            (DS, Severity::Moderate, 6),
                            (Stroke, Severity::Moderate, 6),
                        ],
                    ),
                },
            ],
        }
    }
}

impl SynthSpec {
    pub fn from_json(text: &str) -> Result<Self, SynthError> {
        let spec: SynthSpec =
            serde_json::from_str(text).map_err(|e| SynthError::SpecInvalid(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn delta_of(&self, f: SegmentalFeature) -> f64 {
        self.delta.get(&f).copied().unwrap_or(2.0)
    }

    pub fn collapse_of(&self, a: Aetiology, f: SegmentalFeature) -> f64 {
        self.collapse.get(&a).and_then(|m| m.get(&f)).copied().unwrap_or(1.0)
    }

    pub fn severity_multiplier(&self, s: Severity) -> f64 {
        self.severity_multipliers.get(&s).copied().unwrap_or(1.0)
    }

    pub fn corpus_name(&self) -> String {
        format!("synth-{}", self.seed)
    }

    pub fn n_speakers(&self) -> usize {
        self.datasets.iter().flat_map(|d| &d.cells).map(|c| c.speakers).sum()
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::SpecInvalid(m));
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if self.dim < super::generate::MIN_DIM {
            return bad(format!("dim must be at least {}", super::generate::MIN_DIM));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return bad("sigma must be positive".into());
        }
        if let Some((f, d)) = self.delta.iter().find(|(_, d)| !(**d > 0.0 && d.is_finite())) {
            return bad(format!("delta for {f} must be positive, got {d}"));
        }
        for (a, m) in &self.collapse {
            if let Some((f, c)) = m.iter().find(|(_, c)| !unit(**c)) {
                return bad(format!("collapse {a}/{f} = {c} outside [0,1]"));
            }
        }
        for (s, m) in &self.severity_multipliers {
            if !unit(*m) {
                return bad(format!("severity multiplier for {s} = {m} outside [0,1]"));
            }
        }
        if let Some((s, p)) = self.pause_prob.iter().find(|(_, p)| !unit(**p)) {
            return bad(format!("pause probability for {s} = {p} outside [0,1]"));
        }
        if !(self.tokens.median >= 1.0 && self.tokens.log_sd >= 0.0 && self.tokens.speaker_log_sd >= 0.0) {
            return bad("token median must be >= 1 and log_sd, speaker_log_sd >= 0".into());
        }
        if !(self.speaker_offset_sd >= 0.0 && self.corner_separation >= 0.0) {
            return bad("speaker_offset_sd and corner_separation must be >= 0".into());
        }
        if !(self.token_severity_slope >= 0.0) {
            return bad("token_severity_slope must be >= 0".into());
        }
        if self.phones_per_utterance < 2 {
            return bad("phones_per_utterance must be at least 2".into());
        }
        if self.backbones.is_empty() || self.backbones.iter().any(|b| b.is_empty() || b.contains('/')) {
            return bad("backbones must be non-empty names without '/'".into());
        }
        if self.datasets.is_empty() {
            return bad("at least one dataset is required".into());
        }
        let mut names = std::collections::BTreeSet::new();
        for d in &self.datasets {
            if !names.insert(&d.name) {
                return bad(format!("duplicate dataset {}", d.name));
            }
            if d.cells.iter().any(|c| c.aetiology == Aetiology::HC && c.severity != Severity::Control) {
                return bad(format!("{}: HC cells must have severity control", d.name));
            }
        }
        Ok(())
    }
}
