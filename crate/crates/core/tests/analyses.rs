mod common;

use std::collections::BTreeMap;

use phonoscope::analyses::*;
use phonoscope::interchange::Aetiology;
use phonoscope::profiles::profile_corpus;
use phonoscope::synth::{generate_corpus, SynthSpec};

use common::{synth, table};

fn quick_severity() -> SeverityParams {
    SeverityParams { n_boot: 200, ..SeverityParams::default() }
}

#[test]
fn severity_gradient_is_monotone_on_planted_data() {
    let rep = severity_gradient(table(), &quick_severity()).unwrap();
    let corr = rep.table("correlation").unwrap();
    assert!(corr.get("spearman", "rho").unwrap() < -0.4);
    assert_eq!(corr.get("spearman", "monotone"), Some(1.0));
    let means = rep.table("levels").unwrap().column("mean");
    let means: Vec<f64> = means.into_iter().flatten().collect();
    assert_eq!(means.len(), 4);
    assert!(means.windows(2).all(|w| w[0] > w[1]), "{means:?}");
}

#[test]
fn severity_gradient_needs_two_levels() {
    let hc_only = table().filter(|r| r.meta.aetiology == Aetiology::HC);
    let err = severity_gradient(&hc_only, &quick_severity()).unwrap_err();
    assert!(matches!(err, AnalysisError::InsufficientSeverityLevels(1)));
}

#[test]
fn severity_gradient_is_seed_deterministic() {
    let a = severity_gradient(table(), &quick_severity()).unwrap();
    let b = severity_gradient(table(), &quick_severity()).unwrap();
    assert_eq!(a.to_json(), b.to_json());
}

#[test]
fn discrimination_finds_aetiology_effect() {
    let rep = aetiology_discrimination(table(), &DiscriminationParams::default()).unwrap();
    let kw = rep.table("kruskal_wallis").unwrap();
    let p = kw.get("composite_consonant_dprime", "p_value").unwrap();
    assert!(p < 0.01, "p = {p}");
    let d = rep.table("cohens_d_matrix").unwrap();
    assert!(d.get("HC", "PD").unwrap() > 0.0);
}

#[test]
fn discrimination_rejects_singleton_group() {
    let mut seen = false;
    let t = table().filter(|r| {
        if r.meta.aetiology != Aetiology::ALS {
            return true;
        }
        !std::mem::replace(&mut seen, true)
    });
    let err = aetiology_discrimination(&t, &DiscriminationParams::default()).unwrap_err();
    assert!(matches!(err, AnalysisError::GroupTooSmall { ref group, .. } if group == "ALS"), "{err:?}");
}

fn quick_crosslingual() -> CrosslingualParams {
    CrosslingualParams { n_boot: 200, n_perm: 200, ..CrosslingualParams::default() }
}

#[test]
fn crosslingual_identical_languages_have_unit_cosine() {
    let mut t = table().filter(|r| r.meta.language == "en");
    let mut copy = t.rows.clone();
    for r in &mut copy {
        r.meta.language = "fr".into();
        r.meta.dataset = "synth_fr".into();
        r.meta.speaker_id = format!("fr_{}", r.meta.speaker_id);
        r.profile.speaker_id = r.meta.speaker_id.clone();
    }
    t.rows.extend(copy);
    let p = CrosslingualParams { aetiologies: vec![Aetiology::PD], ..quick_crosslingual() };
    let rep = crosslingual_consistency(&t, &p).unwrap();
    let c = rep.table("consistency").unwrap();
    let cos = c.get("PD", "mean_cosine").unwrap();
    assert!((cos - 1.0).abs() < 1e-12, "{cos}");
}

#[test]
fn crosslingual_requires_a_qualifying_pair() {
    let p = CrosslingualParams { min_n: 100, ..quick_crosslingual() };
    let err = crosslingual_consistency(table(), &p).unwrap_err();
    assert!(matches!(err, AnalysisError::NoQualifyingLanguagePair { min_n: 100, .. }));
}

#[test]
fn crosslingual_planted_pd_profile_is_shared() {
    let rep = crosslingual_consistency(table(), &quick_crosslingual()).unwrap();
    let c = rep.table("consistency").unwrap();
    assert!(c.get("PD", "mean_cosine").unwrap() > 0.9);
    assert_eq!(c.get("PD", "n_languages"), Some(2.0));
}

#[test]
fn backbone_agreement_of_identical_tables_is_perfect() {
    let tables = BTreeMap::from([("a".to_string(), table().clone()), ("b".to_string(), table().clone())]);
    let rep = backbone_agreement(&tables, &BackboneParams::default()).unwrap();
    let rho = rep.table("composite_rho").unwrap();
    assert!((rho.get("a vs b", "rho").unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn backbone_agreement_needs_two_backbones() {
    let tables = BTreeMap::from([("a".to_string(), table().clone())]);
    assert!(matches!(
        backbone_agreement(&tables, &BackboneParams::default()),
        Err(AnalysisError::NoSharedSpeakers { .. })
    ));
}

#[test]
fn two_synth_backbones_agree() {
    let spec = SynthSpec { backbones: vec!["bb-a".into(), "bb-b".into()], ..SynthSpec::default() };
    let s = generate_corpus(&spec).unwrap();
    let tables: BTreeMap<String, _> = s
        .corpora
        .iter()
        .map(|c| (c.backbone_id().to_string(), profile_corpus(c, &s.feature_configs)))
        .collect();
    let rep = backbone_agreement(&tables, &BackboneParams::default()).unwrap();
    assert!(rep.table("composite_rho").unwrap().get("bb-a vs bb-b", "rho").unwrap() > 0.6);
}

#[test]
fn fixed_token_budget_beyond_every_speaker_fails() {
    let s = synth();
    let p = FixedTokenParams { budgets: vec![100_000], n_repeats: 2, seed: 0 };
    let err = fixed_token_profiles(&s.corpora[0], &s.feature_configs, &p).unwrap_err();
    assert_eq!(err, AnalysisError::NoQualifyingSpeakers);
}

#[test]
fn fixed_token_dprime_tracks_full_sample_value() {
    let s = synth();
    let p = FixedTokenParams { budgets: vec![20], n_repeats: 20, seed: 3 };
    let ft = fixed_token_profiles(&s.corpora[0], &s.feature_configs, &p).unwrap();
    let full = table();
    let mut diffs = Vec::new();
    for (si, meta) in ft.speakers.iter().enumerate() {
        let row = full.rows.iter().find(|r| r.meta.speaker_id == meta.speaker_id).unwrap();
        if let (Some(a), Some(b)) = (ft.composite(0, si), row.profile.composite_consonant()) {
            diffs.push((a - b).abs());
        }
    }
    assert!(diffs.len() > 20);
    let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
    assert!(mean < 0.15, "mean |fixed - full| = {mean}");
}

#[test]
fn fixed_token_report_has_one_row_per_budget() {
    let s = synth();
    let p = FixedTokenParams { budgets: vec![10, 20], n_repeats: 5, seed: 1 };
    let rep = fixed_token_dprime(&s.corpora[0], &s.feature_configs, &p).unwrap();
    assert_eq!(rep.table("budgets").unwrap().rows, vec!["10".to_string(), "20".to_string()]);
}

#[test]
fn greedy_matching_with_disjoint_ranges_is_empty() {
    assert!(greedy_match(&[10, 11, 12], &[100, 120], 0.2).is_empty());
    assert_eq!(greedy_match(&[100], &[120], 0.2), vec![(0, 0)]);
    assert!(greedy_match(&[100], &[121], 0.2).is_empty());
}

#[test]
fn token_matched_comparison_runs_on_synth() {
    let rep = token_matched_comparison(table(), &MatchingParams::default()).unwrap();
    let t = rep.table("adjacent_levels").unwrap();
    assert!(!t.rows.is_empty());
    assert!(t.column("n_pairs").into_iter().flatten().any(|n| n > 0.0));
}

#[test]
fn lodo_needs_two_datasets() {
    let one = table().filter(|r| r.meta.dataset == "synth_en");
    assert_eq!(lodo_stability(&one, &LodoParams::default()).unwrap_err(), AnalysisError::SingleDataset(1));
    let rep = lodo_stability(table(), &LodoParams::default()).unwrap();
    assert_eq!(rep.table("folds").unwrap().rows.len(), 2);
    assert!(rep.table("summary").unwrap().get("rho", "max").unwrap() < 0.0);
}

#[test]
fn centroid_classifier_beats_chance_and_shuffle_control() {
    let p = ClassifierParams::default();
    let rep = centroid_classifier_lodo(table(), &p).unwrap();
    let m = rep.table("metrics").unwrap();
    let f1 = m.get("macro_f1", "value").unwrap();
    assert!(f1 > 1.0 / 6.0, "macro F1 {f1}");
    let shuffled = centroid_classifier_lodo(table(), &ClassifierParams { shuffle_labels: true, ..p }).unwrap();
    assert_ne!(rep.to_json(), shuffled.to_json());
}

#[test]
fn residualization_preserves_planted_orderings() {
    let rep = residualized_rankings(table()).unwrap();
    let v = rep.table("preservation").unwrap();
    assert_eq!(v.get("composite_consonant_dprime", "severity_order_preserved"), Some(1.0));
    assert!(v.get("composite_consonant_dprime", "n").unwrap() > 50.0);
}

#[test]
fn baseline_comparison_on_synth() {
    let rep = baseline_comparison(table(), &BaselineParams::default()).unwrap();
    let m = rep.table("models").unwrap();
    for model in ["main13", "main13_plus_ctc", "ctc_only"] {
        assert!(m.get(model, "rmse").unwrap() > 0.0);
    }
    assert!(m.get("main13", "rho").unwrap() > 0.3);
}

#[test]
fn baseline_comparison_requires_ctc_and_rows() {
    let mut t = table().clone();
    for r in &mut t.rows {
        r.meta.ctc_conf = None;
    }
    assert_eq!(baseline_comparison(&t, &BaselineParams::default()).unwrap_err(), AnalysisError::MissingBaselineColumn);
    let few = table().filter(|r| r.meta.dataset == "synth_es");
    assert!(matches!(
        baseline_comparison(&few, &BaselineParams::default()),
        Err(AnalysisError::InsufficientData { needed: 50, .. })
    ));
}

#[test]
fn severity_override_uses_intelligibility() {
    let mut t = table().clone();
    let changed = apply_severity_override(&mut t).unwrap();
    assert_eq!(changed, 0, "synth threshold speakers are already consistent");
    for r in t.rows.iter().filter(|r| r.meta.intelligibility_pct.is_some()) {
        assert_eq!(stipancic_map(r.meta.intelligibility_pct.unwrap()).unwrap(), r.meta.severity);
    }
}

#[test]
fn reports_write_json_markdown_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let rep = residualized_rankings(table()).unwrap();
    let paths = rep.write(dir.path()).unwrap();
    let names: Vec<String> = paths.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
    assert!(names.contains(&"residualized_rankings.json".to_string()));
    assert!(names.contains(&"residualized_rankings.md".to_string()));
    assert!(names.contains(&"residualized_rankings.preservation.csv".to_string()));
    let back = AnalysisReport::from_json(&std::fs::read_to_string(&paths[0]).unwrap()).unwrap();
    assert_eq!(back, rep);
}
