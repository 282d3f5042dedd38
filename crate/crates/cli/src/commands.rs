use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use phonoscope::analyses::{self, *};
use phonoscope::interchange::{load_feature_config_dir, read_corpus, validate_corpus, FeatureConfigs, Level};
use phonoscope::profiles::profile_corpus;
use phonoscope::synth::{generate_corpus, ledger_check, write_synth, SynthSpec, TolerancePolicy};
use phonoscope::{Corpus, ProfileTable};
use serde::Serialize;

use crate::config::RunConfig;
use crate::CliError;

/// A loaded configuration plus where its relative paths resolve from.
pub struct Run {
    pub cfg: RunConfig,
    pub base: PathBuf,
    pub command: String,
}

#[derive(Serialize)]
struct RunMeta<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config_hash: String,
    seed: u64,
    config: &'a RunConfig,
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

impl Run {
    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    /// `output_dir/<config hash>`; every artifact of this run lives below it.
    pub fn out_dir(&self) -> PathBuf {
        self.resolve(&self.cfg.output_dir).join(self.cfg.hash12())
    }

    pub fn write_meta(&self) -> Result<PathBuf, CliError> {
        let meta = RunMeta {
            tool: "phonoscope",
            version: env!("CARGO_PKG_VERSION"),
            command: &self.command,
            config_hash: self.cfg.hash12(),
            seed: self.cfg.seed,
            config: &self.cfg,
        };
        let path = self.out_dir().join("run_meta.json");
        write(&path, &(serde_json::to_string_pretty(&meta).expect("meta serializes") + "\n"))?;
        Ok(path)
    }

    fn corpus_root(&self) -> Result<PathBuf, CliError> {
        let p = self.cfg.corpus_root.as_ref().ok_or_else(|| CliError::Config("corpus_root is not set".into()))?;
        Ok(self.resolve(p))
    }

    fn feature_dir(&self) -> Result<PathBuf, CliError> {
        let p = self
            .cfg
            .feature_config_dir
            .as_ref()
            .ok_or_else(|| CliError::Config("feature_config_dir is not set".into()))?;
        Ok(self.resolve(p))
    }

    fn feature_configs(&self) -> Result<FeatureConfigs, CliError> {
        let dir = self.feature_dir()?;
        load_feature_config_dir(&dir).map_err(|e| CliError::Corpus(format!("{}: {e}", dir.display())))
    }

    /// One corpus per configured backbone; with none configured, the
    /// manifest's own backbone.
    fn corpora(&self) -> Result<Vec<Corpus>, CliError> {
        let root = self.corpus_root()?;
        let ids = if self.cfg.backbone_ids.is_empty() {
            let text = fs::read_to_string(root.join("manifest.json"))
                .map_err(|e| CliError::Corpus(format!("{}: {e}", root.join("manifest.json").display())))?;
            let m = phonoscope::Manifest::from_json(&text).map_err(|e| CliError::Corpus(e.to_string()))?;
            vec![m.backbone_id]
        } else {
            self.cfg.backbone_ids.clone()
        };
        ids.iter()
            .map(|b| read_corpus(&root, b).map_err(|e| CliError::Corpus(format!("backbone {b}: {e}"))))
            .collect()
    }

    fn profile_tables(&self, corpora: &[Corpus], fcs: &FeatureConfigs) -> Result<BTreeMap<String, ProfileTable>, CliError> {
        let mut out = BTreeMap::new();
        for c in corpora {
            let mut t = profile_corpus(c, fcs);
            for f in &t.findings {
                eprintln!("{}: {f}", c.backbone_id());
            }
            if self.cfg.severity_override {
                let n = apply_severity_override(&mut t).map_err(|e| CliError::Corpus(e.to_string()))?;
                eprintln!("{}: severity override changed {n} speakers", c.backbone_id());
            }
            out.insert(c.backbone_id().to_string(), t);
        }
        Ok(out)
    }

    fn synth_spec(&self) -> SynthSpec {
        let mut spec = self.cfg.synth.clone().unwrap_or_default();
        spec.seed = self.cfg.seed;
        if !self.cfg.backbone_ids.is_empty() {
            spec.backbones = self.cfg.backbone_ids.clone();
        }
        spec
    }
}

pub fn validate(run: &Run) -> Result<(), CliError> {
    let fcs = run.feature_configs()?;
    let corpora = run.corpora()?;
    let mut errors = 0;
    for c in &corpora {
        let rep = validate_corpus(c, &fcs);
        for f in &rep.findings {
            println!("{}: {f}", c.backbone_id());
        }
        println!(
            "{}: {} speakers, {} errors, {} warnings",
            c.backbone_id(),
            c.n_speakers(),
            rep.count(Level::Error),
            rep.count(Level::Warning)
        );
        errors += rep.count(Level::Error);
        let path = run.out_dir().join(c.backbone_id()).join("validation.json");
        write(&path, &(serde_json::to_string_pretty(&rep).expect("report serializes") + "\n"))?;
    }
    run.write_meta()?;
    if errors > 0 {
        return Err(CliError::Corpus(format!("validation found {errors} errors")));
    }
    Ok(())
}

pub fn profiles(run: &Run) -> Result<(), CliError> {
    let fcs = run.feature_configs()?;
    let corpora = run.corpora()?;
    for (backbone, t) in run.profile_tables(&corpora, &fcs)? {
        let path = run.out_dir().join(&backbone).join("profiles.csv");
        write(&path, &t.to_csv())?;
        println!("{}", path.display());
    }
    run.write_meta()?;
    Ok(())
}

fn run_one(
    id: &str,
    run: &Run,
    corpora: &[Corpus],
    fcs: &FeatureConfigs,
    tables: &BTreeMap<String, ProfileTable>,
) -> Result<Vec<(Option<String>, AnalysisReport)>, AnalysisError> {
    let e = run.cfg.entry(id);
    let seed = e.seed.unwrap_or(run.cfg.seed);
    if id == "backbone_agreement" {
        let p = BackboneParams { reference: e.reference.clone(), seed };
        return Ok(vec![(None, backbone_agreement(tables, &p)?)]);
    }
    let mut out = Vec::new();
    for c in corpora {
        let t = &tables[c.backbone_id()];
        let rep = match id {
            "severity_gradient" => {
                let d = SeverityParams::default();
                severity_gradient(t, &SeverityParams { n_boot: e.n_boot.unwrap_or(d.n_boot), seed, ..d })?
            }
            "aetiology_discrimination" => aetiology_discrimination(t, &DiscriminationParams { seed, ..Default::default() })?,
            "crosslingual" => {
                let d = CrosslingualParams::default();
                let p = CrosslingualParams {
                    min_n: e.min_n.unwrap_or(d.min_n),
                    min_hc: e.min_hc.unwrap_or(d.min_hc),
                    n_boot: e.n_boot.unwrap_or(d.n_boot),
                    n_perm: e.n_perm.unwrap_or(d.n_perm),
                    seed,
                    ..d
                };
                crosslingual_consistency(t, &p)?
            }
            "fixed_token" => {
                let d = FixedTokenParams::default();
                let p = FixedTokenParams {
                    budgets: e.budgets.clone().unwrap_or(d.budgets),
                    n_repeats: e.n_repeats.unwrap_or(d.n_repeats),
                    seed,
                };
                fixed_token_dprime(c, fcs, &p)?
            }
            "token_matched" => {
                let d = MatchingParams::default();
                token_matched_comparison(t, &MatchingParams { tolerance: e.tolerance.unwrap_or(d.tolerance), seed, ..d })?
            }
            "lodo_stability" => lodo_stability(t, &LodoParams { seed, ..Default::default() })?,
            "centroid_classifier" => centroid_classifier_lodo(t, &ClassifierParams { seed, ..Default::default() })?,
            "residualized_rankings" => residualized_rankings(t)?,
            "baseline_comparison" => {
                let d = BaselineParams::default();
                let p = BaselineParams { k_folds: e.k_folds.unwrap_or(d.k_folds), lambda: e.lambda.unwrap_or(d.lambda), seed };
                baseline_comparison(t, &p)?
            }
            other => return Err(AnalysisError::InvalidParameter(format!("unknown analysis {other}"))),
        };
        out.push((Some(c.backbone_id().to_string()), rep));
    }
    Ok(out)
}

/// Runs one analysis (or `all`). With `all`, an analysis that fails is
/// reported and the rest still run; the exit status is 3 if any failed.
pub fn analyze(run: &Run, id: &str) -> Result<(), CliError> {
    let all = id == "all";
    let ids: Vec<&str> = if all {
        analyses::ANALYSIS_IDS.to_vec()
    } else {
        vec![canonical_id(id).ok_or_else(|| CliError::Config(format!("unknown analysis id {id:?}")))?]
    };
    let fcs = run.feature_configs()?;
    let corpora = run.corpora()?;
    let tables = run.profile_tables(&corpora, &fcs)?;
    let mut failures = Vec::new();
    for id in ids {
        // Asking for it by name on one backbone is an error; `all` skips it.
        if all && id == "backbone_agreement" && corpora.len() < 2 {
            println!("{id}: skipped, needs two backbones");
            continue;
        }
        match run_one(id, run, &corpora, &fcs, &tables) {
            Ok(reports) => {
                for (backbone, rep) in reports {
                    let dir = match &backbone {
                        Some(b) => run.out_dir().join(b),
                        None => run.out_dir(),
                    };
                    let paths = rep.write(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
                    for f in &rep.findings {
                        println!("{id}: {f}");
                    }
                    for p in paths {
                        println!("{}", p.display());
                    }
                }
            }
            Err(e) => {
                eprintln!("{id}: {e}");
                failures.push(format!("{id}: {e}"));
            }
        }
    }
    run.write_meta()?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Analysis(failures.join("; ")))
    }
}

pub fn synth(run: &Run) -> Result<(), CliError> {
    let spec = run.synth_spec();
    let out = generate_corpus(&spec).map_err(|e| CliError::Config(e.to_string()))?;
    let (root, fdir) = (run.corpus_root()?, run.feature_dir()?);
    write_synth(&out, &root, &fdir).map_err(|e| CliError::Io(e.to_string()))?;
    println!(
        "wrote {} speakers, backbones {:?}, to {}",
        out.manifest().speakers.len(),
        spec.backbones,
        root.display()
    );
    run.write_meta()?;
    Ok(())
}

#[derive(Serialize)]
struct SelftestEntry {
    backbone: String,
    checked: usize,
    within: usize,
    missing: usize,
    fraction_within: f64,
    max_abs_z: f64,
    passed: bool,
}

/// Generates a corpus, writes it, reads it back, profiles it and checks
/// the recovered d-primes against the ground-truth ledger.
pub fn selftest(run: &Run) -> Result<(), CliError> {
    let spec = run.synth_spec();
    let dir = run.out_dir().join("selftest");
    let (root, fdir) = (dir.join("corpus"), dir.join("features"));
    let out = generate_corpus(&spec).map_err(|e| CliError::Config(e.to_string()))?;
    write_synth(&out, &root, &fdir).map_err(|e| CliError::Io(e.to_string()))?;
    let fcs = load_feature_config_dir(&fdir).map_err(|e| CliError::Corpus(e.to_string()))?;
    let policy = TolerancePolicy::default();
    let mut entries = Vec::new();
    for b in &spec.backbones {
        let c = read_corpus(&root, b).map_err(|e| CliError::Corpus(e.to_string()))?;
        let t = profile_corpus(&c, &fcs);
        let chk = ledger_check(&c, &out.ledger, &t, policy).map_err(|e| CliError::Analysis(e.to_string()))?;
        println!(
            "{b}: {}/{} ledger cells within {} SE ({:.4}), max |z| {:.2}: {}",
            chk.within,
            chk.checked,
            policy.k,
            chk.fraction_within(),
            chk.max_abs_z,
            if chk.passed() { "PASS" } else { "FAIL" }
        );
        entries.push(SelftestEntry {
            backbone: b.clone(),
            checked: chk.checked,
            within: chk.within,
            missing: chk.missing.len(),
            fraction_within: chk.fraction_within(),
            max_abs_z: chk.max_abs_z,
            passed: chk.passed(),
        });
    }
    write(&dir.join("ledger_check.json"), &(serde_json::to_string_pretty(&entries).expect("serializes") + "\n"))?;
    run.write_meta()?;
    if entries.iter().all(|e| e.passed) {
        Ok(())
    } else {
        Err(CliError::Analysis("ledger check failed".into()))
    }
}
