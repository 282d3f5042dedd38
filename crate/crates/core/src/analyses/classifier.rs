use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{AnalysisError, AnalysisReport, ReportTable};
use crate::interchange::Aetiology;
use crate::profiles::{FeatureSubset, ProfileTable};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierParams {
    pub subset: FeatureSubset,
    pub classes: Vec<Aetiology>,
    /// Permute class labels across rows first (a chance-level control).
    pub shuffle_labels: bool,
    pub seed: u64,
}

impl Default for ClassifierParams {
    fn default() -> Self {
        ClassifierParams {
            subset: FeatureSubset::Consonant5,
            classes: Aetiology::MAIN.to_vec(),
            shuffle_labels: false,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPoint {
    /// Held-out unit (dataset).
    pub group: String,
    pub class: String,
    pub x: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassifierOutcome {
    pub classes: Vec<String>,
    /// `confusion[truth][predicted]`, indexed like `classes`.
    pub confusion: Vec<Vec<usize>>,
    pub accuracy: f64,
    /// Mean recall over classes that occur in the truth.
    pub balanced_accuracy: f64,
    /// Mean F1 over all `classes`.
    pub macro_f1: f64,
    pub f1: Vec<f64>,
    /// Classes with no true and no predicted rows (F1 set to 0).
    pub flagged: Vec<String>,
    /// (held-out group, n_train, n_test, n_correct).
    pub folds: Vec<(String, usize, usize, usize)>,
}

/// Leave-one-group-out nearest-centroid classification. Features are
/// z-scored with training statistics; distance ties go to the class whose
/// name sorts first.
pub fn nearest_centroid_lodo(
    points: &[LabeledPoint],
    classes: &[String],
) -> Result<ClassifierOutcome, AnalysisError> {
    let groups: BTreeSet<&str> = points.iter().map(|p| p.group.as_str()).collect();
    if groups.len() < 2 {
        return Err(AnalysisError::SingleDataset(groups.len()));
    }
    let class_idx: BTreeMap<&str, usize> =
        classes.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
    let k = classes.len();
    let dim = points[0].x.len();
    let mut confusion = vec![vec![0usize; k]; k];
    let mut folds = Vec::new();
    for g in &groups {
        let train: Vec<&LabeledPoint> = points.iter().filter(|p| p.group != *g).collect();
        let test: Vec<&LabeledPoint> = points.iter().filter(|p| p.group == *g).collect();
        if train.is_empty() {
            return Err(AnalysisError::ClassAbsentFromAllTraining(g.to_string()));
        }
        let n = train.len() as f64;
        let mu: Vec<f64> = (0..dim).map(|d| train.iter().map(|p| p.x[d]).sum::<f64>() / n).collect();
        let sd: Vec<f64> = (0..dim)
            .map(|d| {
                let v = train.iter().map(|p| (p.x[d] - mu[d]).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
                if v.sqrt() > 1e-12 { v.sqrt() } else { 1.0 }
            })
            .collect();
        let z = |x: &[f64]| -> Vec<f64> { (0..dim).map(|d| (x[d] - mu[d]) / sd[d]).collect() };
        // Sorted by class name, which fixes the tie-break.
        let mut cent: BTreeMap<&str, (Vec<f64>, usize)> = BTreeMap::new();
        for p in &train {
            let e = cent.entry(p.class.as_str()).or_insert_with(|| (vec![0.0; dim], 0));
            for (a, v) in e.0.iter_mut().zip(z(&p.x)) {
                *a += v;
            }
            e.1 += 1;
        }
        let cent: Vec<(&str, Vec<f64>)> = cent
            .into_iter()
            .map(|(c, (s, m))| (c, s.into_iter().map(|v| v / m as f64).collect()))
            .collect();
        let mut correct = 0;
        for p in &test {
            let zx = z(&p.x);
            let mut best: Option<(&str, f64)> = None;
            for (c, m) in &cent {
                let d2: f64 = zx.iter().zip(m).map(|(a, b)| (a - b).powi(2)).sum();
                if best.is_none_or(|(_, bd)| d2 < bd) {
                    best = Some((c, d2));
                }
            }
            let pred = best.expect("training set is non-empty").0;
            let (Some(&ti), Some(&pi)) = (class_idx.get(p.class.as_str()), class_idx.get(pred)) else {
                continue;
            };
            confusion[ti][pi] += 1;
            correct += usize::from(ti == pi);
        }
        folds.push((g.to_string(), train.len(), test.len(), correct));
    }

    let total: usize = confusion.iter().flatten().sum();
    let diag: usize = (0..k).map(|i| confusion[i][i]).sum();
    let mut recalls = Vec::new();
    let mut f1 = Vec::with_capacity(k);
    let mut flagged = Vec::new();
    for i in 0..k {
        let truth: usize = confusion[i].iter().sum();
        let pred: usize = (0..k).map(|r| confusion[r][i]).sum();
        let tp = confusion[i][i] as f64;
        if truth > 0 {
            recalls.push(tp / truth as f64);
        }
        if truth == 0 && pred == 0 {
            flagged.push(classes[i].clone());
        }
        f1.push(if tp > 0.0 { 2.0 * tp / (truth + pred) as f64 } else { 0.0 });
    }
    Ok(ClassifierOutcome {
        classes: classes.to_vec(),
        accuracy: if total > 0 { diag as f64 / total as f64 } else { 0.0 },
        balanced_accuracy: if recalls.is_empty() { 0.0 } else { recalls.iter().sum::<f64>() / recalls.len() as f64 },
        macro_f1: if k > 0 { f1.iter().sum::<f64>() / k as f64 } else { 0.0 },
        f1,
        confusion,
        flagged,
        folds,
    })
}

/// Nearest-centroid aetiology classifier on complete-case profile subsets,
/// evaluated leave-one-dataset-out.
pub fn centroid_classifier_lodo(
    t: &ProfileTable,
    p: &ClassifierParams,
) -> Result<AnalysisReport, AnalysisError> {
    let mut rep = AnalysisReport::new("centroid_classifier", p.seed);
    rep.param("subset", p.subset);
    rep.param("classes", &p.classes);
    rep.param("shuffle_labels", p.shuffle_labels);
    let mut points: Vec<LabeledPoint> = t
        .rows
        .iter()
        .filter(|r| p.classes.contains(&r.meta.aetiology))
        .filter_map(|r| {
            Some(LabeledPoint {
                group: r.meta.dataset.clone(),
                class: r.meta.aetiology.to_string(),
                x: r.profile.complete(p.subset)?,
            })
        })
        .collect();
    if p.shuffle_labels {
        let mut labels: Vec<String> = points.iter().map(|q| q.class.clone()).collect();
        labels.shuffle(&mut rng::stream(p.seed, &[rng::key_of("labels")]));
        for (q, l) in points.iter_mut().zip(labels) {
            q.class = l;
        }
    }
    let classes: Vec<String> = p.classes.iter().map(|c| c.to_string()).collect();
    let out = nearest_centroid_lodo(&points, &classes)?;
    for c in &out.flagged {
        rep.finding(format!("class {c} has no rows and no predictions; F1 set to 0"));
    }
    let mut metrics = ReportTable::new("metrics", "metric", ["value"]);
    metrics.push("accuracy", [Some(out.accuracy)]);
    metrics.push("balanced_accuracy", [Some(out.balanced_accuracy)]);
    metrics.push("macro_f1", [Some(out.macro_f1)]);
    metrics.push("n", [Some(points.len() as f64)]);
    let mut per = ReportTable::new("per_class", "class", ["n_true", "n_pred", "f1"]);
    let mut conf = ReportTable::new("confusion", "truth", classes.clone());
    for (i, c) in classes.iter().enumerate() {
        let truth: usize = out.confusion[i].iter().sum();
        let pred: usize = out.confusion.iter().map(|r| r[i]).sum();
        per.push(c.as_str(), [Some(truth as f64), Some(pred as f64), Some(out.f1[i])]);
        conf.push(c.as_str(), out.confusion[i].iter().map(|&v| Some(v as f64)));
    }
    let mut folds = ReportTable::new("folds", "held_out", ["n_train", "n_test", "accuracy"]);
    for (g, ntr, nte, ok) in &out.folds {
        folds.push(g.as_str(), [Some(*ntr as f64), Some(*nte as f64), (*nte > 0).then(|| *ok as f64 / *nte as f64)]);
    }
    rep.tables.extend([metrics, per, conf, folds]);
    Ok(rep)
}
