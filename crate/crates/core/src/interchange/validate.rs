use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::Serialize;

use super::config::{FeatureConfigs, SegmentalFeature, Side};
use super::corpus::Corpus;
use super::tokens::{Tier, Token};

/// Tokens required in each class before a d-prime is estimated.
pub const MIN_TOKENS_PER_CLASS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Info,
    Warning,
    Error,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Info => "info",
            Level::Warning => "warning",
            Level::Error => "error",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Finding {
    pub level: Level,
    pub speaker_id: Option<String>,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.speaker_id {
            Some(s) => write!(f, "[{}] {}: {}", self.level, s, self.message),
            None => write!(f, "[{}] {}", self.level, self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpeakerCounts {
    pub speaker_id: String,
    pub n_phones: usize,
    /// (pos, neg) token counts per configured feature.
    pub features: BTreeMap<String, (usize, usize)>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
    pub counts: Vec<SpeakerCounts>,
}

impl ValidationReport {
    pub fn has_errors(&self) -> bool {
        self.findings.iter().any(|f| f.level == Level::Error)
    }

    pub fn count(&self, level: Level) -> usize {
        self.findings.iter().filter(|f| f.level == level).count()
    }
}

/// Checks a corpus without modifying it. Findings are data; nothing here
/// fails.
pub fn validate_corpus(corpus: &Corpus, configs: &FeatureConfigs) -> ValidationReport {
    let mut report = ValidationReport::default();
    let push = |report: &mut ValidationReport, level, speaker: Option<&str>, message: String| {
        report.findings.push(Finding {
            level,
            speaker_id: speaker.map(str::to_owned),
            message,
        })
    };

    // Interval checks on the raw token table.
    let mut groups: HashMap<(&str, Tier), Vec<&Token>> = HashMap::new();
    for t in &corpus.tokens().rows {
        if !(t.end_s > t.start_s) {
            push(
                &mut report,
                Level::Error,
                Some(&t.speaker_id),
                format!(
                    "{} token {:?} in {} has end {} <= start {}",
                    t.tier, &*t.label, &*t.utterance_id, t.end_s, t.start_s
                ),
            );
        }
        groups.entry((&t.utterance_id, t.tier)).or_default().push(t);
    }
    let mut keys: Vec<_> = groups.keys().copied().collect();
    keys.sort();
    for key in keys {
        let list = groups.get_mut(&key).unwrap();
        list.sort_by(|a, b| a.start_s.total_cmp(&b.start_s));
        for w in list.windows(2) {
            if w[1].start_s < w[0].end_s - 1e-9 {
                push(
                    &mut report,
                    Level::Error,
                    Some(&w[1].speaker_id),
                    format!(
                        "overlapping {} intervals in {} at {:.3}s",
                        key.1, key.0, w[1].start_s
                    ),
                );
            }
        }
    }

    let mut missing_langs: Vec<&str> = Vec::new();
    for (meta, toks) in corpus.speakers() {
        let sid = meta.speaker_id.as_str();
        let bad_rows = toks
            .phones()
            .filter(|p| corpus.embedding(p.row).iter().any(|v| !v.is_finite()))
            .count();
        if bad_rows > 0 {
            push(
                &mut report,
                Level::Error,
                Some(sid),
                format!("{bad_rows} embedding rows contain NaN or Inf"),
            );
        }
        let n_phones = toks.n_phones();
        if n_phones == 0 {
            push(&mut report, Level::Warning, Some(sid), "speaker has no phone tokens".into());
        }
        let mut counts = SpeakerCounts {
            speaker_id: sid.to_owned(),
            n_phones,
            features: BTreeMap::new(),
        };
        match configs.get(&meta.language) {
            None => {
                if !missing_langs.contains(&meta.language.as_str()) {
                    missing_langs.push(&meta.language);
                }
            }
            Some(cfg) => {
                for f in SegmentalFeature::ALL {
                    let Some(classes) = cfg.classes(f) else { continue };
                    let (mut pos, mut neg) = (0, 0);
                    for p in toks.phones() {
                        match classes.side_of(&p.label) {
                            Some(Side::Pos) => pos += 1,
                            Some(Side::Neg) => neg += 1,
                            None => {}
                        }
                    }
                    let least = pos.min(neg);
                    if n_phones > 0 && least < MIN_TOKENS_PER_CLASS {
                        push(
                            &mut report,
                            Level::Warning,
                            Some(sid),
                            format!(
                                "feature {f} unavailable for {sid} ({least} < {MIN_TOKENS_PER_CLASS} per class)"
                            ),
                        );
                    }
                    counts.features.insert(f.name().to_owned(), (pos, neg));
                }
            }
        }
        report.counts.push(counts);
    }
    for lang in missing_langs {
        push(
            &mut report,
            Level::Warning,
            None,
            format!("no feature configuration for language {lang}; segmental features will be missing"),
        );
    }
    report
}
