use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::ledger::{GroundTruthLedger, LedgerSpeaker};
use super::{SynthError, SynthSpec};
use crate::interchange::{
    write_corpus, Corpus, EmbeddingMatrix, FeatureClasses, FeatureConfig, FeatureConfigs,
    Manifest, RowRef, SegmentalFeature, Severity, SeveritySource, SpeakerMeta, Tier, Token,
    TokenTable,
};
use crate::{par, rng};

/// Embedding axes of the /i/ and /u/ corner means (/a/ sits at the origin).
pub const CORNER_AXES: [usize; 2] = [9, 10];
pub(super) const MIN_DIM: usize = 11;

const CORNERS: [&str; 3] = ["a", "i", "u"];

/// Phone inventory: (feature, positive labels, negative labels). Every
/// label belongs to exactly one class of one feature.
pub fn inventory() -> [(SegmentalFeature, [&'static str; 2], [&'static str; 2]); 9] {
    use SegmentalFeature as F;
    [
        (F::Nasality, ["m", "n"], ["p", "t"]),
        (F::Voicing, ["b", "d"], ["k", "f"]),
        (F::Sonorance, ["l", "r"], ["g", "v"]),
        (F::Stridency, ["s", "z"], ["th", "dh"]),
        (F::Manner, ["w", "y"], ["ch", "jh"]),
        (F::Height, ["iy", "uw"], ["ae", "aa"]),
        (F::Lowness, ["ao", "ah"], ["ih", "uh"]),
        (F::Backness, ["ow", "oy"], ["eh", "ey"]),
        (F::Rounding, ["er", "aw"], ["ay", "ax"]),
    ]
}

/// Output of [`generate_corpus`]: one corpus per backbone sharing a manifest
/// and token table.
#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub corpora: Vec<Corpus>,
    pub ledger: GroundTruthLedger,
    pub feature_configs: FeatureConfigs,
}

impl SynthCorpus {
    pub fn manifest(&self) -> &Manifest {
        self.corpora[0].manifest()
    }

    pub fn corpus(&self, backbone_id: &str) -> Option<&Corpus> {
        self.corpora.iter().find(|c| c.backbone_id() == backbone_id)
    }
}

#[derive(Clone, Copy)]
enum Kind {
    Class(usize, bool),
    Corner(usize),
}

struct SpeakerDraft {
    meta: SpeakerMeta,
    /// (kind, label, start_ms, end_ms, utterance) in row order.
    phones: Vec<(Kind, &'static str, u32, u32, usize)>,
    words: Vec<(u32, u32, usize)>,
    n_utterances: usize,
    ledger: LedgerSpeaker,
}

fn is_vowel(label: &str) -> bool {
    CORNERS.contains(&label)
        || inventory()[5..].iter().any(|(_, p, n)| p.contains(&label) || n.contains(&label))
}

fn feature_config(language: &str) -> FeatureConfig {
    let set = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
    let features = inventory()
        .into_iter()
        .map(|(f, p, n)| (f, FeatureClasses { pos: set(&p), neg: set(&n) }))
        .collect();
    let mut vowel_set = set(&CORNERS);
    for (_, p, n) in &inventory()[5..] {
        vowel_set.extend(set(p));
        vowel_set.extend(set(n));
    }
    FeatureConfig {
        language: language.to_owned(),
        features,
        vowel_corners: CORNERS.map(str::to_owned),
        vowel_set,
    }
}

fn intelligibility_for(severity: Severity, r: &mut impl Rng) -> f64 {
    let (lo, hi) = match severity {
        Severity::Control => (95.0, 99.9),
        Severity::Mild => (85.0, 94.0),
        Severity::Moderate => (70.0, 84.9),
        Severity::Severe => (40.0, 69.9),
        Severity::Unknown => (40.0, 99.9),
    };
    (r.gen_range(lo..=hi) * 10.0_f64).round() / 10.0
}

fn draft_speaker(
    spec: &SynthSpec,
    global: usize,
    meta: SpeakerMeta,
) -> SpeakerDraft {
    let mut r = rng::stream(spec.seed, &[rng::key_of("speaker"), global as u64]);
    let ord = meta.severity.ordinal().map_or(1.0, f64::from);
    let mult = spec.severity_multiplier(meta.severity);
    // Drawn only when enabled so that corpora without it keep their streams.
    let volume = if spec.tokens.speaker_log_sd > 0.0 {
        let z: f64 = StandardNormal.sample(&mut r);
        (spec.tokens.speaker_log_sd * z).exp()
    } else {
        1.0
    };
    let scale = (-spec.token_severity_slope * ord).exp() * volume;
    let draw_count = |r: &mut rand_chacha::ChaCha8Rng| {
        let z: f64 = StandardNormal.sample(r);
        let n = (spec.tokens.median * (spec.tokens.log_sd * z).exp() * scale).round();
        (n as usize).max(spec.tokens.min).max(1)
    };

    let mut pool: Vec<(Kind, &'static str)> = Vec::new();
    let mut ledger = LedgerSpeaker {
        speaker_id: meta.speaker_id.clone(),
        severity_multiplier: mult,
        true_dprime: BTreeMap::new(),
        counts: BTreeMap::new(),
        true_vowel_triangle_area: 0.5 * (spec.corner_separation * mult).powi(2),
    };
    for (fi, (f, pos, neg)) in inventory().into_iter().enumerate() {
        let mut counts = [0usize; 2];
        for (side, labels) in [(true, pos), (false, neg)] {
            let n = draw_count(&mut r);
            counts[usize::from(!side)] = n;
            pool.extend((0..n).map(|k| (Kind::Class(fi, side), labels[k % 2])));
        }
        let eff = spec.delta_of(f) * spec.collapse_of(meta.aetiology, f) * mult;
        ledger.true_dprime.insert(f, eff / spec.sigma);
        ledger.counts.insert(f, (counts[0], counts[1]));
    }
    for (ci, label) in CORNERS.iter().enumerate() {
        let n = draw_count(&mut r);
        pool.extend((0..n).map(|_| (Kind::Corner(ci), *label)));
    }
    pool.shuffle(&mut r);

    let pause_p = spec.pause_prob.get(&meta.severity).copied().unwrap_or(0.2);
    let slow = 1.0 + 0.15 * ord;
    let mut phones = Vec::with_capacity(pool.len());
    let mut words = Vec::new();
    let mut n_utterances = 0;
    for (u, chunk) in pool.chunks(spec.phones_per_utterance).enumerate() {
        n_utterances += 1;
        let mut t: u32 = 300;
        let mut i = 0;
        while i < chunk.len() {
            if i > 0 {
                t += if r.gen_bool(pause_p) { r.gen_range(200..=500) } else { r.gen_range(20..=120) };
            }
            let len = r.gen_range(2..=4).min(chunk.len() - i);
            let word_start = t;
            for &(kind, label) in &chunk[i..i + len] {
                let base = if is_vowel(label) { 90.0 } else { 65.0 };
                let ms = (base * slow * r.gen_range(0.75..1.25)).round().max(20.0) as u32;
                phones.push((kind, label, t, t + ms, u));
                t += ms;
            }
            words.push((word_start, t, u));
            i += len;
        }
    }
    SpeakerDraft { meta, phones, words, n_utterances, ledger }
}

fn embed_speaker(
    spec: &SynthSpec,
    backbone: usize,
    global: usize,
    draft: &SpeakerDraft,
) -> Vec<f32> {
    let mut r = rng::stream(spec.seed, &[rng::key_of("noise"), backbone as u64, global as u64]);
    let dim = spec.dim;
    let mult = draft.ledger.severity_multiplier;
    let offset: Vec<f64> = (0..dim)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut r);
            spec.speaker_offset_sd * z
        })
        .collect();
    let half: Vec<f64> = inventory()
        .iter()
        .map(|(f, _, _)| {
            spec.delta_of(*f) * spec.collapse_of(draft.meta.aetiology, *f) * mult / 2.0
        })
        .collect();
    let corner = spec.corner_separation * mult;
    let mut out = Vec::with_capacity(draft.phones.len() * dim);
    for (kind, ..) in &draft.phones {
        let mut x = offset.clone();
        match *kind {
            Kind::Class(fi, side) => x[fi] += if side { half[fi] } else { -half[fi] },
            Kind::Corner(0) => {}
            Kind::Corner(ci) => x[CORNER_AXES[ci - 1]] += corner,
        }
        for v in &mut x {
            let z: f64 = StandardNormal.sample(&mut r);
            *v += spec.sigma * z;
        }
        out.extend(x.iter().map(|&v| v as f32));
    }
    out
}

/// Generates the corpus (one per backbone), its ground-truth ledger and the
/// matching feature configurations.
pub fn generate_corpus(spec: &SynthSpec) -> Result<SynthCorpus, SynthError> {
    spec.validate()?;
    let mut metas = Vec::new();
    for d in &spec.datasets {
        let mut k = 0;
        for cell in &d.cells {
            for _ in 0..cell.speakers {
                metas.push(SpeakerMeta {
                    speaker_id: format!("{}_{k:04}", d.name),
                    dataset: d.name.clone(),
                    language: d.language.clone(),
                    aetiology: cell.aetiology,
                    severity: cell.severity,
                    severity_source: d.severity_source,
                    intelligibility_pct: None,
                    ctc_conf: None,
                });
                k += 1;
            }
        }
    }
    let mut drafts: Vec<SpeakerDraft> =
        par::map_range(metas.len(), |g| draft_speaker(spec, g, metas[g].clone()));
    for (g, d) in drafts.iter_mut().enumerate() {
        let mut r = rng::stream(spec.seed, &[rng::key_of("meta"), g as u64]);
        let ord = d.meta.severity.ordinal().map_or(1.0, f64::from);
        if d.meta.severity_source == SeveritySource::Threshold {
            d.meta.intelligibility_pct = Some(intelligibility_for(d.meta.severity, &mut r));
        }
        let z: f64 = StandardNormal.sample(&mut r);
        let conf = (0.95 - 0.12 * ord + 0.04 * z).clamp(0.0, 1.0);
        d.meta.ctc_conf = Some((conf * 1e4).round() / 1e4);
    }

    let manifest = Arc::new(Manifest {
        corpus_name: spec.corpus_name(),
        backbone_id: spec.backbones[0].clone(),
        dim: spec.dim,
        speakers: drafts.iter().map(|d| d.meta.clone()).collect(),
    });

    let mut tokens = Vec::new();
    let mut rows = Vec::new();
    let sec = |ms: u32| f64::from(ms) / 1000.0;
    for d in &drafts {
        let sid: Arc<str> = Arc::from(d.meta.speaker_id.as_str());
        let utts: Vec<Arc<str>> = (0..d.n_utterances)
            .map(|u| Arc::from(format!("{}_u{u:03}", d.meta.speaker_id)))
            .collect();
        let mut ordinal = vec![0usize; d.n_utterances];
        for &(_, label, s, e, u) in &d.phones {
            rows.push(RowRef { utterance_id: utts[u].to_string(), token_ordinal: ordinal[u] });
            ordinal[u] += 1;
            tokens.push(Token {
                speaker_id: sid.clone(),
                utterance_id: utts[u].clone(),
                tier: Tier::Phone,
                label: Arc::from(label),
                start_s: sec(s),
                end_s: sec(e),
            });
        }
        for &(s, e, u) in &d.words {
            tokens.push(Token {
                speaker_id: sid.clone(),
                utterance_id: utts[u].clone(),
                tier: Tier::Word,
                label: Arc::from("w"),
                start_s: sec(s),
                end_s: sec(e),
            });
        }
    }
    let tokens = Arc::new(TokenTable { rows: tokens });

    let mut corpora = Vec::with_capacity(spec.backbones.len());
    for (b, backbone) in spec.backbones.iter().enumerate() {
        let parts = par::map_range(drafts.len(), |g| embed_speaker(spec, b, g, &drafts[g]));
        let data: Vec<f32> = parts.concat();
        let emb = EmbeddingMatrix::new(spec.dim, data);
        corpora.push(Corpus::new(
            manifest.clone(),
            tokens.clone(),
            backbone.clone(),
            emb,
            rows.clone(),
        )?);
    }

    let languages: BTreeSet<&str> = spec.datasets.iter().map(|d| d.language.as_str()).collect();
    let feature_configs = languages.into_iter().map(|l| (l.to_owned(), feature_config(l))).collect();
    let ledger = GroundTruthLedger {
        corpus_name: spec.corpus_name(),
        seed: spec.seed,
        sigma: spec.sigma,
        speakers: drafts.into_iter().map(|d| d.ledger).collect(),
    };
    Ok(SynthCorpus { corpora, ledger, feature_configs })
}

/// Writes every backbone's corpus plus `ground_truth.json` under
/// `corpus_root`, and one `<language>.json` per feature configuration.
pub fn write_synth(
    out: &SynthCorpus,
    corpus_root: &Path,
    feature_config_dir: &Path,
) -> Result<(), SynthError> {
    let io = |p: &Path, e| crate::interchange::InterchangeError::io(p, e);
    for c in &out.corpora {
        write_corpus(corpus_root, c)?;
    }
    let ledger_path = corpus_root.join("ground_truth.json");
    std::fs::write(&ledger_path, out.ledger.to_json()).map_err(|e| io(&ledger_path, e))?;
    std::fs::create_dir_all(feature_config_dir).map_err(|e| io(feature_config_dir, e))?;
    for (lang, fc) in &out.feature_configs {
        let p = feature_config_dir.join(format!("{lang}.json"));
        std::fs::write(&p, fc.to_json()).map_err(|e| io(&p, e))?;
    }
    Ok(())
}
