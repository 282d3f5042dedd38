//! Speaker profiles: healthy-control feature directions, per-speaker
//! d-primes, structural and prosodic metrics, and the profile table.

mod directions;
mod dprime;
mod prosodic;
mod structural;
mod table;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interchange::SegmentalFeature;

pub use directions::{estimate_directions, estimate_directions_lenient, DirectionSet};
pub use dprime::{dprime, segmental_profile, SegmentalResult};
pub(crate) use dprime::class_projections;
pub use prosodic::{prosodic_metrics, ProsodicMetrics, PAUSE_THRESHOLD_S};
pub use structural::{structural_metrics, StructuralMetrics, MIN_CORNER_TOKENS};
pub use table::{assemble_profiles, profile_corpus, ProfileRow, ProfileTable};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProfileError {
    #[error("no healthy-control speakers for language {0}")]
    NoHealthyControls(String),
    #[error("feature {0}: a class has no healthy-control tokens")]
    EmptyFeatureClass(SegmentalFeature),
    #[error("feature {0}: class means coincide, direction undefined")]
    DegenerateDirection(SegmentalFeature),
    #[error("d-prime needs at least 2 values per class, got {pos} and {neg}")]
    TooFewTokens { pos: usize, neg: usize },
    #[error("pooled standard deviation below 1e-12")]
    DegenerateVariance,
    #[error("invalid profiles.csv: {0}")]
    Csv(String),
}

/// The 15 profile features, in column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    Nasality,
    Voicing,
    Sonorance,
    Stridency,
    Manner,
    Height,
    Lowness,
    Backness,
    Rounding,
    BoundarySharpness,
    CrossPositionCos,
    VowelTriangleArea,
    SpeechRate,
    PauseRate,
    VowelDurationCv,
}

impl Feature {
    pub const ALL: [Feature; 15] = [
        Feature::Nasality,
        Feature::Voicing,
        Feature::Sonorance,
        Feature::Stridency,
        Feature::Manner,
        Feature::Height,
        Feature::Lowness,
        Feature::Backness,
        Feature::Rounding,
        Feature::BoundarySharpness,
        Feature::CrossPositionCos,
        Feature::VowelTriangleArea,
        Feature::SpeechRate,
        Feature::PauseRate,
        Feature::VowelDurationCv,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Feature::Nasality => "nasality",
            Feature::Voicing => "voicing",
            Feature::Sonorance => "sonorance",
            Feature::Stridency => "stridency",
            Feature::Manner => "manner",
            Feature::Height => "height",
            Feature::Lowness => "lowness",
            Feature::Backness => "backness",
            Feature::Rounding => "rounding",
            Feature::BoundarySharpness => "boundary_sharpness",
            Feature::CrossPositionCos => "cross_position_cos",
            Feature::VowelTriangleArea => "vowel_triangle_area",
            Feature::SpeechRate => "speech_rate",
            Feature::PauseRate => "pause_rate",
            Feature::VowelDurationCv => "vowel_duration_cv",
        }
    }

    pub fn from_name(name: &str) -> Option<Feature> {
        Feature::ALL.into_iter().find(|f| f.name() == name)
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn segmental(self) -> Option<SegmentalFeature> {
        SegmentalFeature::ALL.get(self.index()).copied()
    }

    pub fn from_segmental(f: SegmentalFeature) -> Feature {
        Feature::ALL[f.index()]
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeatureSubset {
    Full15,
    /// Drops the two content-type-dependent structural features.
    Main13,
    Consonant5,
}

impl FeatureSubset {
    pub fn features(self) -> Vec<Feature> {
        match self {
            FeatureSubset::Full15 => Feature::ALL.to_vec(),
            FeatureSubset::Main13 => Feature::ALL
                .into_iter()
                .filter(|f| !matches!(f, Feature::BoundarySharpness | Feature::CrossPositionCos))
                .collect(),
            FeatureSubset::Consonant5 => Feature::ALL[..5].to_vec(),
        }
    }
}

/// A per-speaker quantity an analysis can run on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Feature(Feature),
    CompositeConsonant,
}

impl Measure {
    pub fn name(self) -> &'static str {
        match self {
            Measure::Feature(f) => f.name(),
            Measure::CompositeConsonant => "composite_consonant_dprime",
        }
    }

    pub fn from_name(name: &str) -> Option<Measure> {
        if name == "composite_consonant_dprime" || name == "composite" {
            return Some(Measure::CompositeConsonant);
        }
        Feature::from_name(name).map(Measure::Feature)
    }
}

/// The 15 feature values of one speaker under one backbone.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpeakerProfile {
    pub speaker_id: String,
    pub backbone_id: String,
    pub values: [Option<f64>; 15],
    pub n_phones: usize,
    /// (pos, neg) token counts per segmental feature.
    pub class_counts: [(usize, usize); 9],
}

impl SpeakerProfile {
    pub fn empty(speaker_id: &str, backbone_id: &str) -> Self {
        SpeakerProfile {
            speaker_id: speaker_id.to_owned(),
            backbone_id: backbone_id.to_owned(),
            values: [None; 15],
            n_phones: 0,
            class_counts: [(0, 0); 9],
        }
    }

    pub fn get(&self, f: Feature) -> Option<f64> {
        self.values[f.index()]
    }

    pub fn set(&mut self, f: Feature, v: Option<f64>) {
        self.values[f.index()] = v.filter(|x| x.is_finite());
    }

    /// Mean of the five consonant d-primes; requires all five.
    pub fn composite_consonant(&self) -> Option<f64> {
        let vals: Option<Vec<f64>> = self.values[..5].iter().copied().collect();
        vals.map(|v| v.iter().sum::<f64>() / 5.0)
    }

    pub fn measure(&self, m: Measure) -> Option<f64> {
        match m {
            Measure::Feature(f) => self.get(f),
            Measure::CompositeConsonant => self.composite_consonant(),
        }
    }

    /// Values of `subset`, or `None` unless all are present.
    pub fn complete(&self, subset: FeatureSubset) -> Option<Vec<f64>> {
        subset.features().into_iter().map(|f| self.get(f)).collect()
    }
}


#[cfg(test)]
mod fixture_tests;
