//! Per-language phone-to-feature-class configuration.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use super::error::{InterchangeError, Result};

/// The nine binary phonological contrasts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentalFeature {
    Nasality,
    Voicing,
    Sonorance,
    Stridency,
    Manner,
    Height,
    Lowness,
    Backness,
    Rounding,
}

impl SegmentalFeature {
    pub const ALL: [SegmentalFeature; 9] = [
        SegmentalFeature::Nasality,
        SegmentalFeature::Voicing,
        SegmentalFeature::Sonorance,
        SegmentalFeature::Stridency,
        SegmentalFeature::Manner,
        SegmentalFeature::Height,
        SegmentalFeature::Lowness,
        SegmentalFeature::Backness,
        SegmentalFeature::Rounding,
    ];
    pub const CONSONANT: [SegmentalFeature; 5] = [
        SegmentalFeature::Nasality,
        SegmentalFeature::Voicing,
        SegmentalFeature::Sonorance,
        SegmentalFeature::Stridency,
        SegmentalFeature::Manner,
    ];
    pub const VOWEL: [SegmentalFeature; 4] = [
        SegmentalFeature::Height,
        SegmentalFeature::Lowness,
        SegmentalFeature::Backness,
        SegmentalFeature::Rounding,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SegmentalFeature::Nasality => "nasality",
            SegmentalFeature::Voicing => "voicing",
            SegmentalFeature::Sonorance => "sonorance",
            SegmentalFeature::Stridency => "stridency",
            SegmentalFeature::Manner => "manner",
            SegmentalFeature::Height => "height",
            SegmentalFeature::Lowness => "lowness",
            SegmentalFeature::Backness => "backness",
            SegmentalFeature::Rounding => "rounding",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_consonant(self) -> bool {
        self.index() < 5
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == name)
    }
}

impl fmt::Display for SegmentalFeature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Pos,
    Neg,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Pos => "pos",
            Side::Neg => "neg",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureClasses {
    pub pos: BTreeSet<String>,
    pub neg: BTreeSet<String>,
}

impl FeatureClasses {
    pub fn side_of(&self, label: &str) -> Option<Side> {
        if self.pos.contains(label) {
            Some(Side::Pos)
        } else if self.neg.contains(label) {
            Some(Side::Neg)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureConfig {
    pub language: String,
    /// Features omitted from the JSON are absent here; their d-primes are
    /// always missing for this language.
    pub features: BTreeMap<SegmentalFeature, FeatureClasses>,
    pub vowel_corners: [String; 3],
    pub vowel_set: BTreeSet<String>,
}

/// Canonical form used for all phone-label comparisons.
pub fn normalize_label(label: &str) -> String {
    label.nfc().collect()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawClasses {
    pos: Vec<String>,
    neg: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    language: String,
    consonant_features: BTreeMap<String, RawClasses>,
    vowel_features: BTreeMap<String, RawClasses>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    vowel_corners: Option<Vec<String>>,
    vowel_set: Vec<String>,
}

fn label_set(labels: &[String]) -> BTreeSet<String> {
    labels.iter().map(|l| normalize_label(l)).collect()
}

impl FeatureConfig {
    pub fn from_json(json_text: &str) -> Result<Self> {
        let raw: RawConfig = serde_json::from_str(json_text).map_err(|e| {
            let msg = e.to_string();
            if let Some(rest) = msg.strip_prefix("unknown field `") {
                let key = rest.split('`').next().unwrap_or(rest);
                return InterchangeError::UnknownFeatureKey(key.to_owned());
            }
            InterchangeError::Json {
                context: "feature config".into(),
                source: e,
            }
        })?;
        if raw.language.trim().is_empty() {
            return Err(InterchangeError::InvalidConfig("language is empty".into()));
        }
        let mut features = BTreeMap::new();
        let sections = [
            (&raw.consonant_features, true),
            (&raw.vowel_features, false),
        ];
        for (section, consonant) in sections {
            for (key, classes) in section {
                let feature = SegmentalFeature::from_name(key)
                    .filter(|f| f.is_consonant() == consonant)
                    .ok_or_else(|| InterchangeError::UnknownFeatureKey(key.clone()))?;
                let pos = label_set(&classes.pos);
                let neg = label_set(&classes.neg);
                for (set, side) in [(&pos, Side::Pos), (&neg, Side::Neg)] {
                    if set.is_empty() || set.iter().any(|l| l.is_empty()) {
                        return Err(InterchangeError::EmptyClass {
                            feature: key.clone(),
                            side,
                        });
                    }
                }
                if let Some(phone) = pos.intersection(&neg).next() {
                    return Err(InterchangeError::OverlappingClasses {
                        feature: key.clone(),
                        phone: phone.clone(),
                    });
                }
                features.insert(feature, FeatureClasses { pos, neg });
            }
        }
        let vowel_set = label_set(&raw.vowel_set);
        let corners: Vec<String> = match raw.vowel_corners {
            Some(c) => c.iter().map(|l| normalize_label(l)).collect(),
            None => vec!["a".into(), "i".into(), "u".into()],
        };
        let vowel_corners: [String; 3] = corners.try_into().map_err(|c: Vec<String>| {
            InterchangeError::InvalidConfig(format!("vowel_corners must have 3 entries, found {}", c.len()))
        })?;
        if let Some(missing) = vowel_corners.iter().find(|c| !vowel_set.contains(*c)) {
            return Err(InterchangeError::InvalidConfig(format!(
                "vowel corner {missing:?} is not in vowel_set"
            )));
        }
        Ok(FeatureConfig {
            language: raw.language,
            features,
            vowel_corners,
            vowel_set,
        })
    }

    pub fn to_json(&self) -> String {
        let section = |consonant: bool| {
            self.features
                .iter()
                .filter(|(f, _)| f.is_consonant() == consonant)
                .map(|(f, c)| {
                    (
                        f.name().to_owned(),
                        RawClasses {
                            pos: c.pos.iter().cloned().collect(),
                            neg: c.neg.iter().cloned().collect(),
                        },
                    )
                })
                .collect()
        };
        let raw = RawConfig {
            language: self.language.clone(),
            consonant_features: section(true),
            vowel_features: section(false),
            vowel_corners: Some(self.vowel_corners.to_vec()),
            vowel_set: self.vowel_set.iter().cloned().collect(),
        };
        let mut s = serde_json::to_string_pretty(&raw).expect("config serializes");
        s.push('\n');
        s
    }

    pub fn classes(&self, f: SegmentalFeature) -> Option<&FeatureClasses> {
        self.features.get(&f)
    }

    pub fn is_vowel(&self, label: &str) -> bool {
        self.vowel_set.contains(label)
    }
}

/// Feature configurations keyed by language code.
pub type FeatureConfigs = BTreeMap<String, FeatureConfig>;

/// Loads every `*.json` in `dir` as a feature configuration.
pub fn load_feature_config_dir(dir: &std::path::Path) -> Result<FeatureConfigs> {
    let entries = std::fs::read_dir(dir).map_err(|e| InterchangeError::io(dir, e))?;
    let mut paths: Vec<_> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    let mut out = FeatureConfigs::new();
    for p in paths {
        let text = std::fs::read_to_string(&p).map_err(|e| InterchangeError::io(&p, e))?;
        let cfg = FeatureConfig::from_json(&text)?;
        out.insert(cfg.language.clone(), cfg);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const NASAL_ONLY: &str = r#"{
        "language": "en",
        "consonant_features": {"nasality": {"pos": ["m", "n", "ng"], "neg": ["p", "b", "t", "d", "k", "g"]}},
        "vowel_features": {},
        "vowel_set": ["a", "i", "u", "e"]
    }"#;

    #[test]
    fn loads_nasality_and_defaults_corners() {
        let cfg = FeatureConfig::from_json(NASAL_ONLY).unwrap();
        let nas = cfg.classes(SegmentalFeature::Nasality).unwrap();
        assert_eq!(nas.pos.len(), 3);
        assert_eq!(nas.neg.len(), 6);
        assert_eq!(nas.side_of("ng"), Some(Side::Pos));
        assert_eq!(nas.side_of("g"), Some(Side::Neg));
        assert_eq!(nas.side_of("a"), None);
        assert_eq!(cfg.vowel_corners, ["a".to_string(), "i".into(), "u".into()]);
        assert!(cfg.classes(SegmentalFeature::Voicing).is_none());
    }

    #[test]
    fn overlapping_classes() {
        let text = NASAL_ONLY.replace(
            r#""nasality": {"pos": ["m", "n", "ng"]"#,
            r#""voicing": {"pos": ["b", "d"]"#,
        );
        assert!(matches!(
            FeatureConfig::from_json(&text),
            Err(InterchangeError::OverlappingClasses { ref phone, .. }) if phone == "b"
        ));
    }

    #[test]
    fn empty_class_and_unknown_keys() {
        let empty = NASAL_ONLY.replace(r#"["m", "n", "ng"]"#, "[]");
        assert!(matches!(
            FeatureConfig::from_json(&empty),
            Err(InterchangeError::EmptyClass { side: Side::Pos, .. })
        ));
        let unknown = NASAL_ONLY.replace("\"nasality\"", "\"aspiration\"");
        assert!(matches!(
            FeatureConfig::from_json(&unknown),
            Err(InterchangeError::UnknownFeatureKey(ref k)) if k == "aspiration"
        ));
        let misplaced = NASAL_ONLY.replace("\"nasality\"", "\"height\"");
        assert!(matches!(
            FeatureConfig::from_json(&misplaced),
            Err(InterchangeError::UnknownFeatureKey(_))
        ));
        let top = NASAL_ONLY.replace("\"language\"", "\"tones\": 1, \"language\"");
        assert!(matches!(
            FeatureConfig::from_json(&top),
            Err(InterchangeError::UnknownFeatureKey(ref k)) if k == "tones"
        ));
    }

    #[test]
    fn corners_must_be_vowels() {
        let text = NASAL_ONLY.replace("\"vowel_set\"", "\"vowel_corners\": [\"a\", \"i\", \"o\"], \"vowel_set\"");
        assert!(FeatureConfig::from_json(&text).is_err());
        let text = NASAL_ONLY.replace("\"vowel_set\"", "\"vowel_corners\": [\"a\", \"i\"], \"vowel_set\"");
        assert!(FeatureConfig::from_json(&text).is_err());
    }

    #[test]
    fn labels_are_nfc_normalized() {
        // "e" + combining acute vs precomposed U+00E9
        let text = NASAL_ONLY.replace("\"e\"]", "\"e\u{301}\"]");
        let cfg = FeatureConfig::from_json(&text).unwrap();
        assert!(cfg.is_vowel("\u{e9}"));
    }

    #[test]
    fn json_round_trip() {
        let cfg = FeatureConfig::from_json(NASAL_ONLY).unwrap();
        assert_eq!(FeatureConfig::from_json(&cfg.to_json()).unwrap(), cfg);
    }
}
