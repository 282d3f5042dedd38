use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use phonoscope::analyses::canonical_id;
use phonoscope::synth::SynthSpec;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

/// Per-analysis parameter overrides. Anything left out takes the library
/// default; `seed` falls back to the run seed.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisEntry {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_hc: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_boot: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_perm: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budgets: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_repeats: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_folds: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("phonoscope_out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corpus_root: Option<PathBuf>,
    #[serde(default)]
    pub backbone_ids: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feature_config_dir: Option<PathBuf>,
    #[serde(default)]
    pub analyses: Vec<AnalysisEntry>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub severity_override: bool,
    /// Generator specification for `synth` and `selftest`; the run seed
    /// replaces its own.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synth: Option<SynthSpec>,
}

/// Command-line values that replace keys of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,
    pub min_n: Option<usize>,
    pub n_boot: Option<usize>,
    pub n_perm: Option<usize>,
    pub min_hc: Option<usize>,
    pub tolerance: Option<f64>,
    pub budgets: Option<Vec<usize>>,
}

impl Overrides {
    fn touches_analysis(&self) -> bool {
        self.min_n.is_some()
            || self.n_boot.is_some()
            || self.n_perm.is_some()
            || self.min_hc.is_some()
            || self.tolerance.is_some()
            || self.budgets.is_some()
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads a config file. Relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: &Path) -> Result<(Self, PathBuf), CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((Self::from_json(&text)?, base))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        let mut seen = BTreeSet::new();
        for e in &self.analyses {
            let Some(id) = canonical_id(&e.id) else {
                return bad(format!("unknown analysis id {:?}", e.id));
            };
            if !seen.insert(id) {
                return bad(format!("analysis {id} listed twice"));
            }
            if let Some(n) = e.n_boot.filter(|&n| n != 0 && n < 100) {
                return bad(format!("{id}: n_boot = {n}; use 0 to skip or at least 100"));
            }
            if let Some(t) = e.tolerance.filter(|t| !(*t >= 0.0)) {
                return bad(format!("{id}: tolerance {t} must be >= 0"));
            }
            if let Some(b) = e.budgets.as_ref().filter(|b| b.is_empty() || b.iter().any(|&x| x < 5)) {
                return bad(format!("{id}: budgets {b:?} must be non-empty and >= 5"));
            }
            if let Some(l) = e.lambda.filter(|l| !(*l >= 0.0)) {
                return bad(format!("{id}: lambda {l} must be >= 0"));
            }
        }
        if let Some(spec) = &self.synth {
            spec.validate().map_err(|e| CliError::Config(e.to_string()))?;
        }
        Ok(())
    }

    /// Applies command-line overrides. Analysis flags need a target
    /// analysis and are rejected otherwise.
    pub fn apply(&mut self, o: &Overrides, analysis: Option<&str>) -> Result<(), CliError> {
        if let Some(out) = &o.output {
            self.output_dir = out.clone();
        }
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if o.touches_analysis() {
            let targets: Vec<&str> = match analysis {
                Some("all") => phonoscope::analyses::ANALYSIS_IDS.to_vec(),
                Some(id) => vec![id],
                None => return Err(CliError::Config("analysis flags only apply to `analyze`".into())),
            };
            for id in targets {
                let e = self.entry_mut(id);
                e.min_n = o.min_n.or(e.min_n);
                e.n_boot = o.n_boot.or(e.n_boot);
                e.n_perm = o.n_perm.or(e.n_perm);
                e.min_hc = o.min_hc.or(e.min_hc);
                e.tolerance = o.tolerance.or(e.tolerance);
                e.budgets = o.budgets.clone().or(e.budgets.take());
            }
        }
        self.validate()
    }

    fn entry_mut(&mut self, id: &str) -> &mut AnalysisEntry {
        let pos = self.analyses.iter().position(|e| canonical_id(&e.id) == Some(id));
        let pos = pos.unwrap_or_else(|| {
            self.analyses.push(AnalysisEntry { id: id.to_string(), ..AnalysisEntry::default() });
            self.analyses.len() - 1
        });
        &mut self.analyses[pos]
    }

    pub fn entry(&self, id: &str) -> AnalysisEntry {
        self.analyses
            .iter()
            .find(|e| canonical_id(&e.id) == Some(id))
            .cloned()
            .unwrap_or_else(|| AnalysisEntry { id: id.to_string(), ..AnalysisEntry::default() })
    }

    /// Canonical JSON of the effective configuration.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// First 12 hex digits of the SHA-256 of [`Self::canonical_json`].
    pub fn hash12(&self) -> String {
        let digest = Sha256::digest(self.canonical_json().as_bytes());
        digest.iter().take(6).map(|b| format!("{b:02x}")).collect()
    }
}
