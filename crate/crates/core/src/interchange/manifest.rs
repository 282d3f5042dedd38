use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::error::{InterchangeError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Aetiology {
    HC,
    PD,
    CP,
    ALS,
    DS,
    Stroke,
    Other,
}

impl Aetiology {
    /// The six groups used by the discrimination analyses.
    pub const MAIN: [Aetiology; 6] = [
        Aetiology::HC,
        Aetiology::PD,
        Aetiology::CP,
        Aetiology::ALS,
        Aetiology::DS,
        Aetiology::Stroke,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Aetiology::HC => "HC",
            Aetiology::PD => "PD",
            Aetiology::CP => "CP",
            Aetiology::ALS => "ALS",
            Aetiology::DS => "DS",
            Aetiology::Stroke => "Stroke",
            Aetiology::Other => "Other",
        }
    }
}

impl fmt::Display for Aetiology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Aetiology {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let all = Aetiology::MAIN.iter().copied().chain([Aetiology::Other]);
        all.into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| format!("unknown aetiology {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Control,
    Mild,
    Moderate,
    Severe,
    Unknown,
}

impl Severity {
    pub const ORDERED: [Severity; 4] = [
        Severity::Control,
        Severity::Mild,
        Severity::Moderate,
        Severity::Severe,
    ];

    /// Ordinal coding control=0 .. severe=3; `None` for unknown.
    pub fn ordinal(self) -> Option<u8> {
        match self {
            Severity::Control => Some(0),
            Severity::Mild => Some(1),
            Severity::Moderate => Some(2),
            Severity::Severe => Some(3),
            Severity::Unknown => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Control => "control",
            Severity::Mild => "mild",
            Severity::Moderate => "moderate",
            Severity::Severe => "severe",
            Severity::Unknown => "unknown",
        }
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Severity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Severity::ORDERED
            .iter()
            .copied()
            .chain([Severity::Unknown])
            .find(|v| v.as_str() == s)
            .ok_or_else(|| format!("unknown severity {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeveritySource {
    Clinical,
    Threshold,
    None,
}

impl SeveritySource {
    pub fn as_str(self) -> &'static str {
        match self {
            SeveritySource::Clinical => "clinical",
            SeveritySource::Threshold => "threshold",
            SeveritySource::None => "none",
        }
    }
}

impl fmt::Display for SeveritySource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SeveritySource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "clinical" => Ok(SeveritySource::Clinical),
            "threshold" => Ok(SeveritySource::Threshold),
            "none" => Ok(SeveritySource::None),
            _ => Err(format!("unknown severity source {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeakerMeta {
    pub speaker_id: String,
    pub dataset: String,
    pub language: String,
    pub aetiology: Aetiology,
    pub severity: Severity,
    pub severity_source: SeveritySource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intelligibility_pct: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ctc_conf: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub corpus_name: String,
    /// Backbone whose embedding width is `dim`.
    pub backbone_id: String,
    pub dim: usize,
    pub speakers: Vec<SpeakerMeta>,
}

impl Manifest {
    pub fn from_json(text: &str) -> Result<Self> {
        let manifest: Manifest =
            serde_json::from_str(text).map_err(|source| InterchangeError::Json {
                context: "manifest.json".into(),
                source,
            })?;
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(InterchangeError::InvalidManifest(m));
        if self.dim == 0 {
            return bad("dim must be at least 1".into());
        }
        if self.backbone_id.trim().is_empty() {
            return bad("backbone_id is empty".into());
        }
        let mut seen = BTreeSet::new();
        for s in &self.speakers {
            if s.speaker_id.is_empty() {
                return bad("empty speaker_id".into());
            }
            if !seen.insert(s.speaker_id.as_str()) {
                return bad(format!("duplicate speaker_id {}", s.speaker_id));
            }
            if !is_iso639_1(&s.language) {
                return bad(format!(
                    "speaker {}: language {:?} is not an ISO-639-1 code",
                    s.speaker_id, s.language
                ));
            }
            match s.intelligibility_pct {
                Some(p) if !(0.0..=100.0).contains(&p) => {
                    return bad(format!(
                        "speaker {}: intelligibility_pct {p} outside [0, 100]",
                        s.speaker_id
                    ))
                }
                None if s.severity_source == SeveritySource::Threshold => {
                    return bad(format!(
                        "speaker {}: threshold-derived severity without intelligibility_pct",
                        s.speaker_id
                    ))
                }
                _ => {}
            }
            if let Some(c) = s.ctc_conf {
                if !(0.0..=1.0).contains(&c) {
                    return bad(format!("speaker {}: ctc_conf {c} outside [0, 1]", s.speaker_id));
                }
            }
        }
        Ok(())
    }

    pub fn speaker(&self, id: &str) -> Option<&SpeakerMeta> {
        self.speakers.iter().find(|s| s.speaker_id == id)
    }
}

fn is_iso639_1(code: &str) -> bool {
    code.len() == 2 && code.bytes().all(|b| b.is_ascii_lowercase())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta(id: &str) -> SpeakerMeta {
        SpeakerMeta {
            speaker_id: id.into(),
            dataset: "d".into(),
            language: "en".into(),
            aetiology: Aetiology::PD,
            severity: Severity::Mild,
            severity_source: SeveritySource::Clinical,
            intelligibility_pct: None,
            ctc_conf: Some(0.8),
        }
    }

    fn manifest(speakers: Vec<SpeakerMeta>) -> Manifest {
        Manifest {
            corpus_name: "c".into(),
            backbone_id: "hubert-base".into(),
            dim: 4,
            speakers,
        }
    }

    #[test]
    fn json_round_trip() {
        let m = manifest(vec![meta("s1"), meta("s2")]);
        let back = Manifest::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
        assert!(m.to_json().contains("\"aetiology\": \"PD\""));
        assert!(m.to_json().contains("\"severity_source\": \"clinical\""));
    }

    #[test]
    fn rejects_duplicates_and_bad_fields() {
        assert!(manifest(vec![meta("s1"), meta("s1")]).validate().is_err());
        let mut m = manifest(vec![meta("s1")]);
        m.dim = 0;
        assert!(m.validate().is_err());
        let mut s = meta("s1");
        s.severity_source = SeveritySource::Threshold;
        assert!(manifest(vec![s.clone()]).validate().is_err());
        s.intelligibility_pct = Some(88.0);
        assert!(manifest(vec![s]).validate().is_ok());
        let mut s = meta("s1");
        s.language = "eng".into();
        assert!(manifest(vec![s]).validate().is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = r#"{"corpus_name":"c","backbone_id":"b","dim":2,"speakers":[],"extra":1}"#;
        assert!(Manifest::from_json(text).is_err());
    }

    #[test]
    fn severity_ordinals() {
        let ords: Vec<_> = Severity::ORDERED.iter().map(|s| s.ordinal().unwrap()).collect();
        assert_eq!(ords, vec![0, 1, 2, 3]);
        assert_eq!(Severity::Unknown.ordinal(), None);
        assert_eq!("Stroke".parse::<Aetiology>().unwrap(), Aetiology::Stroke);
    }
}
