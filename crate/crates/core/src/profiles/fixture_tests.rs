//! Known-answer checks on small hand-built corpora.

use std::collections::BTreeMap;
use std::sync::Arc;

use proptest::prelude::*;

use super::*;
use crate::interchange::{
    Aetiology, Corpus, EmbeddingMatrix, FeatureConfig, FeatureConfigs, Manifest, Phone, RowRef,
    Severity, SeveritySource, Span, SpeakerMeta, SpeakerTokens, Tier, Token, TokenTable, Utterance,
};
use crate::synth::{generate_corpus, CellSpec, DatasetSpec, SynthSpec};

const NASAL_CFG: &str = r#"{
    "language": "en",
    "consonant_features": {"nasality": {"pos": ["m", "n"], "neg": ["p", "t"]}},
    "vowel_features": {},
    "vowel_set": ["a", "i", "u"]
}"#;

fn meta(id: &str, aetiology: Aetiology, language: &str) -> SpeakerMeta {
    SpeakerMeta {
        speaker_id: id.into(),
        dataset: "d".into(),
        language: language.into(),
        aetiology,
        severity: if aetiology == Aetiology::HC { Severity::Control } else { Severity::Mild },
        severity_source: SeveritySource::Clinical,
        intelligibility_pct: None,
        ctc_conf: None,
    }
}

type Utt<'a> = Vec<(&'a str, Vec<f32>)>;

/// One 100 ms phone after another, one word per phone.
fn build(speakers: Vec<(SpeakerMeta, Vec<Utt<'_>>)>, dim: usize) -> Corpus {
    let mut tokens = Vec::new();
    let mut rows = Vec::new();
    let mut data = Vec::new();
    for (m, utts) in &speakers {
        for (u, phones) in utts.iter().enumerate() {
            let uid = format!("{}_{u}", m.speaker_id);
            for (k, (label, emb)) in phones.iter().enumerate() {
                let (s, e) = (k as f64 * 0.1, (k + 1) as f64 * 0.1);
                for tier in [Tier::Phone, Tier::Word] {
                    tokens.push(Token {
                        speaker_id: Arc::from(m.speaker_id.as_str()),
                        utterance_id: Arc::from(uid.as_str()),
                        tier,
                        label: Arc::from(*label),
                        start_s: s,
                        end_s: e,
                    });
                }
                rows.push(RowRef { utterance_id: uid.clone(), token_ordinal: k });
                assert_eq!(emb.len(), dim);
                data.extend_from_slice(emb);
            }
        }
    }
    let manifest = Manifest {
        corpus_name: "fixture".into(),
        backbone_id: "bb".into(),
        dim,
        speakers: speakers.iter().map(|(m, _)| m.clone()).collect(),
    };
    Corpus::new(
        Arc::new(manifest),
        Arc::new(TokenTable { rows: tokens }),
        "bb",
        EmbeddingMatrix::new(dim, data),
        rows,
    )
    .unwrap()
}

fn configs() -> FeatureConfigs {
    let fc = FeatureConfig::from_json(NASAL_CFG).unwrap();
    BTreeMap::from([("en".to_string(), fc)])
}

fn repeat<'a>(label: &'a str, v: &[f32], n: usize) -> Utt<'a> {
    (0..n).map(|_| (label, v.to_vec())).collect()
}

#[test]
fn direction_from_point_masses() {
    let mut utt = repeat("m", &[3.0, 1.0, 0.0], 3);
    utt.extend(repeat("p", &[0.0, -3.0, 0.0], 4));
    let c = build(vec![(meta("h1", Aetiology::HC, "en"), vec![utt])], 3);
    let fcs = configs();
    let ds = estimate_directions(&c, "en", &fcs["en"]).unwrap();
    let w = ds.direction(crate::interchange::SegmentalFeature::Nasality).unwrap();
    assert!((w[0] - 0.6).abs() < 1e-12 && (w[1] - 0.8).abs() < 1e-12 && w[2] == 0.0);
    assert_eq!(ds.hc_speaker_count, 1);
    assert_eq!(ds.hc_token_counts[&crate::interchange::SegmentalFeature::Nasality], (3, 4));
}

#[test]
fn direction_errors() {
    let c = build(vec![(meta("p1", Aetiology::PD, "en"), vec![repeat("m", &[1.0], 2)])], 1);
    assert_eq!(
        estimate_directions(&c, "en", &configs()["en"]),
        Err(ProfileError::NoHealthyControls("en".into()))
    );
    let c = build(vec![(meta("h1", Aetiology::HC, "en"), vec![repeat("m", &[1.0], 2)])], 1);
    assert_eq!(
        estimate_directions(&c, "en", &configs()["en"]),
        Err(ProfileError::EmptyFeatureClass(crate::interchange::SegmentalFeature::Nasality))
    );
}

fn noisy(label: &str, base: f32, n: usize) -> Utt<'_> {
    (0..n).map(|k| (label, vec![base + 0.1 * k as f32, 1.0])).collect()
}

#[test]
fn five_tokens_per_class_is_enough_four_is_not() {
    let mut five = noisy("n", 2.0, 5);
    five.extend(noisy("t", 0.0, 5));
    let mut four = noisy("n", 2.0, 4);
    four.extend(noisy("t", 0.0, 6));
    let c = build(
        vec![
            (meta("h1", Aetiology::HC, "en"), vec![five]),
            (meta("s4", Aetiology::PD, "en"), vec![four]),
        ],
        2,
    );
    let t = profile_corpus(&c, &configs());
    assert!(t.rows[0].profile.get(Feature::Nasality).is_some());
    assert_eq!(t.rows[0].profile.class_counts[0], (5, 5));
    assert_eq!(t.rows[1].profile.get(Feature::Nasality), None);
    assert_eq!(t.rows[1].profile.class_counts[0], (4, 6));
    // All other features unconfigured: segmental values missing, composite too.
    assert_eq!(t.rows[0].profile.composite_consonant(), None);
}

#[test]
fn speaker_without_baseline_is_flagged() {
    let c = build(
        vec![
            (meta("h1", Aetiology::HC, "en"), vec![noisy("m", 1.0, 6)]),
            (meta("x1", Aetiology::PD, "fr"), vec![noisy("m", 1.0, 6)]),
        ],
        2,
    );
    let t = profile_corpus(&c, &configs());
    assert!(t.findings.iter().any(|f| f.speaker_id.as_deref() == Some("x1")));
}

#[test]
fn identical_embeddings_give_degenerate_geometry() {
    let v = [0.3f32, -0.7, 1.1];
    let mut utt = repeat("a", &v, 3);
    utt.extend(repeat("i", &v, 3));
    utt.extend(repeat("u", &v, 3));
    let c = build(vec![(meta("h1", Aetiology::HC, "en"), vec![utt.clone(), utt])], 3);
    let fcs = configs();
    let s = structural_metrics(&c, c.speaker(0).1, Some(&fcs["en"]));
    assert!(s.boundary_sharpness.unwrap().abs() < 1e-12);
    assert!((s.cross_position_cos.unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(s.vowel_triangle_area, Some(0.0));
}

#[test]
fn triangle_of_unit_corners() {
    let mut utt = repeat("a", &[0.0, 0.0, 0.0, 0.0], 3);
    utt.extend(repeat("i", &[1.0, 0.0, 0.0, 0.0], 3));
    utt.extend(repeat("u", &[0.0, 1.0, 0.0, 0.0], 3));
    let c = build(vec![(meta("h1", Aetiology::HC, "en"), vec![utt.clone()])], 4);
    let fcs = configs();
    let s = structural_metrics(&c, c.speaker(0).1, Some(&fcs["en"]));
    assert_eq!(s.vowel_triangle_area, Some(0.5));

    utt.truncate(8); // only two /u/
    let c = build(vec![(meta("h1", Aetiology::HC, "en"), vec![utt])], 4);
    let s = structural_metrics(&c, c.speaker(0).1, Some(&fcs["en"]));
    assert_eq!(s.vowel_triangle_area, None);
}

#[test]
fn boundary_pairs_stay_within_utterances() {
    // Two utterances, each internally constant but orthogonal to the other:
    // cross-utterance pairs would add distance 1.
    let c = build(
        vec![(
            meta("h1", Aetiology::HC, "en"),
            vec![repeat("m", &[1.0, 0.0], 3), repeat("m", &[0.0, 1.0], 3)],
        )],
        2,
    );
    let s = structural_metrics(&c, c.speaker(0).1, None);
    assert!(s.boundary_sharpness.unwrap().abs() < 1e-12);
    // Six /m/ tokens, 3 along each axis: 6 of 15 pairs have cos 1.
    assert!((s.cross_position_cos.unwrap() - 6.0 / 15.0).abs() < 1e-12);
}

fn brute_cross_position(vecs: &BTreeMap<String, Vec<Vec<f64>>>) -> Option<f64> {
    let mut per = Vec::new();
    for v in vecs.values().filter(|v| v.len() >= 2) {
        let mut s = 0.0;
        let mut n = 0.0;
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                s += crate::stats::cosine(&v[i], &v[j]).unwrap();
                n += 1.0;
            }
        }
        per.push(s / n);
    }
    (!per.is_empty()).then(|| per.iter().sum::<f64>() / per.len() as f64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cross_position_matches_pairwise_definition(
        toks in prop::collection::vec((0usize..3, prop::collection::vec(0.1f32..2.0, 3)), 2..25)
    ) {
        let labels = ["m", "p", "a"];
        let utt: Utt = toks.iter().map(|(l, v)| (labels[*l], v.clone())).collect();
        let mut by: BTreeMap<String, Vec<Vec<f64>>> = BTreeMap::new();
        for (l, v) in &toks {
            by.entry(labels[*l].into()).or_default().push(v.iter().map(|&x| x as f64).collect());
        }
        let c = build(vec![(meta("h1", Aetiology::HC, "en"), vec![utt])], 3);
        let s = structural_metrics(&c, c.speaker(0).1, None);
        match (s.cross_position_cos, brute_cross_position(&by)) {
            (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-10),
            (a, b) => prop_assert_eq!(a, b),
        }
    }
}

fn speaker_with_times(phones: &[(&str, f64, f64)], words: &[(f64, f64)]) -> SpeakerTokens {
    SpeakerTokens {
        utterances: vec![Utterance {
            id: Arc::from("u"),
            phones: phones
                .iter()
                .enumerate()
                .map(|(k, &(l, s, e))| Phone { label: Arc::from(l), start_s: s, end_s: e, row: k })
                .collect(),
            words: words.iter().map(|&(s, e)| Span { start_s: s, end_s: e }).collect(),
        }],
    }
}

#[test]
fn prosodic_hand_values() {
    let phones: Vec<(&str, f64, f64)> =
        (0..10).map(|k| ("a", k as f64 * 0.3, k as f64 * 0.3 + 0.2)).collect();
    let words = [(0.0, 0.5), (0.6, 1.0), (1.2, 1.5), (1.66, 2.0)];
    let sp = speaker_with_times(&phones, &words);
    let fcs = configs();
    let p = prosodic_metrics(&sp, Some(&fcs["en"]));
    assert!((p.speech_rate.unwrap() - 5.0).abs() < 1e-12);
    assert!((p.pause_rate.unwrap() - 2.0 / 3.0).abs() < 1e-12);
    assert!(p.vowel_duration_cv.unwrap().abs() < 1e-9);

    let no_words = speaker_with_times(&phones, &[]);
    assert_eq!(prosodic_metrics(&no_words, None).pause_rate, None);
    assert_eq!(prosodic_metrics(&no_words, None).vowel_duration_cv, None);
}

#[test]
fn exactly_150ms_is_not_a_pause() {
    let sp = speaker_with_times(&[("a", 0.0, 0.1)], &[(0.0, 0.25), (0.4, 0.5)]);
    assert_eq!(prosodic_metrics(&sp, None).pause_rate, Some(0.0));
}

fn small_spec(seed: u64) -> SynthSpec {
    SynthSpec {
        seed,
        datasets: vec![DatasetSpec {
            name: "d".into(),
            language: "en".into(),
            severity_source: SeveritySource::Clinical,
            cells: vec![
                CellSpec { aetiology: Aetiology::HC, severity: Severity::Control, speakers: 6 },
                CellSpec { aetiology: Aetiology::PD, severity: Severity::Moderate, speakers: 4 },
            ],
        }],
        ..SynthSpec::default()
    }
}

#[test]
fn scale_invariance() {
    let out = generate_corpus(&small_spec(3)).unwrap();
    let c = &out.corpora[0];
    let base = profile_corpus(c, &out.feature_configs);
    let target = c.speaker_index("d_0007").unwrap();
    let scale = 3.5f32;
    let dim = c.dim();
    let mut data = c.embeddings().as_slice().to_vec();
    for ph in c.speaker(target).1.phones() {
        for x in &mut data[ph.row * dim..(ph.row + 1) * dim] {
            *x *= scale;
        }
    }
    let scaled = Corpus::new(
        c.manifest_arc(),
        c.tokens_arc(),
        c.backbone_id(),
        EmbeddingMatrix::new(dim, data),
        c.rows().to_vec(),
    )
    .unwrap();
    let t = profile_corpus(&scaled, &out.feature_configs);
    let (a, b) = (&base.rows[target].profile, &t.rows[target].profile);
    let close = |x: f64, y: f64, tol: f64| (x - y).abs() <= tol * (1.0 + x.abs());
    for f in &Feature::ALL[..11] {
        assert!(close(a.get(*f).unwrap(), b.get(*f).unwrap(), 1e-6), "{f}");
    }
    let (va, vb) = (a.get(Feature::VowelTriangleArea).unwrap(), b.get(Feature::VowelTriangleArea).unwrap());
    assert!(close(va * (scale as f64).powi(2), vb, 1e-6));
    // Other speakers are untouched.
    assert_eq!(base.rows[0], t.rows[0]);
}

#[test]
fn planted_direction_is_recovered() {
    let spec = SynthSpec {
        sigma: 0.2,
        speaker_offset_sd: 0.0,
        tokens: crate::synth::TokenDist { median: 100.0, log_sd: 0.0, min: 5, speaker_log_sd: 0.0 },
        datasets: vec![DatasetSpec {
            name: "d".into(),
            language: "en".into(),
            severity_source: SeveritySource::Clinical,
            cells: vec![CellSpec { aetiology: Aetiology::HC, severity: Severity::Control, speakers: 5 }],
        }],
        ..SynthSpec::default()
    };
    let out = generate_corpus(&spec).unwrap();
    let ds = estimate_directions(&out.corpora[0], "en", &out.feature_configs["en"]).unwrap();
    for (fi, (f, _, _)) in crate::synth::inventory().iter().enumerate() {
        assert_eq!(ds.hc_token_counts[f], (500, 500));
        let w = ds.direction(*f).unwrap();
        let angle = w[fi].clamp(-1.0, 1.0).acos().to_degrees();
        assert!(angle < 2.0, "{f}: {angle} degrees");
    }
}

#[test]
fn hc_normalized_near_one_without_impairment() {
    let mut spec = small_spec(11);
    spec.collapse.clear();
    for m in spec.severity_multipliers.values_mut() {
        *m = 1.0;
    }
    spec.tokens.median = 150.0;
    let out = generate_corpus(&spec).unwrap();
    let t = profile_corpus(&out.corpora[0], &out.feature_configs);
    for f in &Feature::ALL[..9] {
        let v: Vec<f64> = t.hc_normalized(Measure::Feature(*f)).into_iter().flatten().collect();
        let m = crate::stats::mean(&v);
        assert!((m - 1.0).abs() < 0.1, "{f}: {m}");
    }
}

#[test]
fn csv_round_trip() {
    let out = generate_corpus(&small_spec(5)).unwrap();
    let t = profile_corpus(&out.corpora[0], &out.feature_configs);
    let text = t.to_csv();
    let back = ProfileTable::from_csv(&text).unwrap();
    assert_eq!(back.to_csv(), text);
    assert_eq!(back.rows.len(), t.rows.len());
    for (a, b) in back.rows.iter().zip(&t.rows) {
        assert_eq!(a.profile.values, b.profile.values);
        assert_eq!(a.profile.n_phones, b.profile.n_phones);
    }
    let header = text.lines().next().unwrap();
    assert!(header.starts_with("speaker_id,backbone_id,dataset,language,aetiology,severity,severity_source,n_phones,nasality,"));
    assert!(header.ends_with("vowel_duration_cv,composite_consonant_dprime"));
    assert!(ProfileTable::from_csv("a,b\n1,2\n").is_err());
}

#[test]
fn min_token_rule_holds_for_every_emitted_dprime() {
    let mut spec = small_spec(21);
    spec.tokens = crate::synth::TokenDist { median: 6.0, log_sd: 0.6, min: 1, speaker_log_sd: 0.0 };
    let out = generate_corpus(&spec).unwrap();
    let t = profile_corpus(&out.corpora[0], &out.feature_configs);
    let mut seen_missing = false;
    for r in &t.rows {
        for k in 0..9 {
            let (p, n) = r.profile.class_counts[k];
            if r.profile.values[k].is_some() {
                assert!(p >= 5 && n >= 5);
            } else {
                seen_missing = true;
            }
        }
    }
    assert!(seen_missing);
}
