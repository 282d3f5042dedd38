use std::collections::BTreeMap;

use super::directions::{estimate_directions_lenient, DirectionSet};
use super::dprime::segmental_profile;
use super::prosodic::prosodic_metrics;
use super::structural::structural_metrics;
use super::{Feature, Measure, ProfileError, SpeakerProfile};
use crate::interchange::{
    Aetiology, Corpus, FeatureConfigs, Finding, Level, Manifest, SpeakerMeta,
};
use crate::par;

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileRow {
    pub meta: SpeakerMeta,
    pub profile: SpeakerProfile,
}

/// One row per (speaker, backbone), plus the findings raised while building it.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProfileTable {
    pub rows: Vec<ProfileRow>,
    pub findings: Vec<Finding>,
}

fn warn(speaker: Option<&str>, message: String) -> Finding {
    Finding { level: Level::Warning, speaker_id: speaker.map(str::to_owned), message }
}

/// Estimates directions for every language that has healthy controls, then
/// assembles the table.
pub fn profile_corpus(c: &Corpus, fcs: &FeatureConfigs) -> ProfileTable {
    let mut findings = Vec::new();
    let mut directions = BTreeMap::new();
    let languages: std::collections::BTreeSet<&str> =
        c.manifest().speakers.iter().map(|s| s.language.as_str()).collect();
    for lang in languages {
        let Some(fc) = fcs.get(lang) else { continue };
        match estimate_directions_lenient(c, lang, fc) {
            Ok(ds) => {
                for (f, why) in &ds.skipped {
                    findings.push(warn(None, format!("{lang}: no direction for {f} ({why})")));
                }
                directions.insert(lang.to_owned(), ds);
            }
            Err(e) => findings.push(warn(None, e.to_string())),
        }
    }
    let mut table = assemble_profiles(c, &directions, fcs);
    findings.append(&mut table.findings);
    table.findings = findings;
    table
}

/// Computes every speaker's profile. Speakers whose language has no
/// direction set keep their segmental features missing and are flagged.
pub fn assemble_profiles(
    c: &Corpus,
    directions: &BTreeMap<String, DirectionSet>,
    fcs: &FeatureConfigs,
) -> ProfileTable {
    let per_speaker: Vec<(ProfileRow, Vec<Finding>)> = par::map_range(c.n_speakers(), |i| {
        let (meta, toks) = c.speaker(i);
        let sid = meta.speaker_id.as_str();
        let mut p = SpeakerProfile::empty(sid, c.backbone_id());
        let mut findings = Vec::new();
        p.n_phones = toks.n_phones();
        let fc = fcs.get(&meta.language);
        if p.n_phones == 0 {
            findings.push(warn(Some(sid), "speaker has no phone tokens".into()));
        }
        match (fc, directions.get(&meta.language)) {
            (Some(fc), Some(ds)) => {
                let seg = segmental_profile(c, toks, ds, fc);
                for (k, v) in seg.values.iter().enumerate() {
                    p.values[k] = *v;
                }
                p.class_counts = seg.counts;
                findings.extend(seg.warnings.into_iter().map(|m| warn(Some(sid), m)));
            }
            _ if p.n_phones > 0 => findings.push(warn(
                Some(sid),
                format!("no healthy-control baseline for language {}; segmental features missing", meta.language),
            )),
            _ => {}
        }
        let s = structural_metrics(c, toks, fc);
        p.set(Feature::BoundarySharpness, s.boundary_sharpness);
        p.set(Feature::CrossPositionCos, s.cross_position_cos);
        p.set(Feature::VowelTriangleArea, s.vowel_triangle_area);
        let pr = prosodic_metrics(toks, fc);
        p.set(Feature::SpeechRate, pr.speech_rate);
        p.set(Feature::PauseRate, pr.pause_rate);
        p.set(Feature::VowelDurationCv, pr.vowel_duration_cv);
        (ProfileRow { meta: meta.clone(), profile: p }, findings)
    });
    let mut table = ProfileTable::default();
    for (row, mut f) in per_speaker {
        table.rows.push(row);
        table.findings.append(&mut f);
    }
    table
}

const META_COLUMNS: [&str; 8] = [
    "speaker_id",
    "backbone_id",
    "dataset",
    "language",
    "aetiology",
    "severity",
    "severity_source",
    "n_phones",
];

fn csv_err(e: impl std::fmt::Display) -> ProfileError {
    ProfileError::Csv(e.to_string())
}

impl ProfileTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn filter(&self, mut keep: impl FnMut(&ProfileRow) -> bool) -> ProfileTable {
        ProfileTable {
            rows: self.rows.iter().filter(|r| keep(r)).cloned().collect(),
            findings: self.findings.clone(),
        }
    }

    pub fn languages(&self) -> Vec<String> {
        let set: std::collections::BTreeSet<&str> =
            self.rows.iter().map(|r| r.meta.language.as_str()).collect();
        set.into_iter().map(str::to_owned).collect()
    }

    pub fn hc_speaker_count(&self, language: &str) -> usize {
        self.rows
            .iter()
            .filter(|r| r.meta.language == language && r.meta.aetiology == Aetiology::HC)
            .count()
    }

    /// Mean of `m` over the language's healthy controls that have it.
    pub fn hc_mean(&self, language: &str, m: Measure) -> Option<f64> {
        let vals: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.meta.language == language && r.meta.aetiology == Aetiology::HC)
            .filter_map(|r| r.profile.measure(m))
            .collect();
        (!vals.is_empty()).then(|| crate::stats::mean(&vals))
    }

    /// HC-normalized value of `m` for every row (value / language HC mean).
    pub fn hc_normalized(&self, m: Measure) -> Vec<Option<f64>> {
        let means: BTreeMap<String, Option<f64>> = self
            .languages()
            .into_iter()
            .map(|l| {
                let v = self.hc_mean(&l, m);
                (l, v)
            })
            .collect();
        self.rows
            .iter()
            .map(|r| {
                let base = means[&r.meta.language]?;
                let v = r.profile.measure(m)?;
                (base != 0.0).then(|| v / base)
            })
            .collect()
    }

    /// Fills fields that profiles.csv does not carry (intelligibility,
    /// confidence) from a manifest.
    pub fn attach_manifest(&mut self, manifest: &Manifest) {
        for row in &mut self.rows {
            if let Some(m) = manifest.speaker(&row.meta.speaker_id) {
                row.meta = m.clone();
            }
        }
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let header = META_COLUMNS
            .iter()
            .copied()
            .chain(Feature::ALL.iter().map(|f| f.name()))
            .chain(["composite_consonant_dprime"]);
        w.write_record(header).expect("in-memory write");
        let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.rows {
            let m = &r.meta;
            let mut rec = vec![
                m.speaker_id.clone(),
                r.profile.backbone_id.clone(),
                m.dataset.clone(),
                m.language.clone(),
                m.aetiology.to_string(),
                m.severity.to_string(),
                m.severity_source.to_string(),
                r.profile.n_phones.to_string(),
            ];
            rec.extend(r.profile.values.iter().map(|v| cell(*v)));
            rec.push(cell(r.profile.composite_consonant()));
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
    }

    pub fn from_csv(text: &str) -> Result<ProfileTable, ProfileError> {
        let mut rd = csv::Reader::from_reader(text.as_bytes());
        let header = rd.headers().map_err(csv_err)?.clone();
        let expected: Vec<&str> = META_COLUMNS
            .iter()
            .copied()
            .chain(Feature::ALL.iter().map(|f| f.name()))
            .chain(["composite_consonant_dprime"])
            .collect();
        if header.iter().collect::<Vec<_>>() != expected {
            return Err(ProfileError::Csv("unexpected header".into()));
        }
        let mut table = ProfileTable::default();
        for (line, rec) in rd.records().enumerate() {
            let rec = rec.map_err(csv_err)?;
            let at = |e: String| ProfileError::Csv(format!("data row {}: {e}", line + 1));
            let num = |s: &str| -> Result<Option<f64>, ProfileError> {
                if s.is_empty() {
                    Ok(None)
                } else {
                    s.parse::<f64>().map(Some).map_err(|e| at(format!("{s:?}: {e}")))
                }
            };
            let meta = SpeakerMeta {
                speaker_id: rec[0].to_owned(),
                dataset: rec[2].to_owned(),
                language: rec[3].to_owned(),
                aetiology: rec[4].parse().map_err(at)?,
                severity: rec[5].parse().map_err(at)?,
                severity_source: rec[6].parse().map_err(at)?,
                intelligibility_pct: None,
                ctc_conf: None,
            };
            let mut p = SpeakerProfile::empty(&rec[0], &rec[1]);
            p.n_phones = rec[7].parse().map_err(|e| at(format!("n_phones: {e}")))?;
            for f in Feature::ALL {
                p.values[f.index()] = num(&rec[8 + f.index()])?;
            }
            table.rows.push(ProfileRow { meta, profile: p });
        }
        Ok(table)
    }
}
