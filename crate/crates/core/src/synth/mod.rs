//! Synthetic corpora with planted, analytically known ground truth.
//!
//! Every segmental feature lives on its own embedding axis, so a speaker's
//! true d' for feature `f` is exactly the effective class separation on that
//! axis divided by the noise standard deviation.

mod generate;
mod ledger;
mod spec;

use thiserror::Error;

pub use generate::{generate_corpus, inventory, write_synth, SynthCorpus, CORNER_AXES};
pub use ledger::{ledger_check, GroundTruthLedger, LedgerCheck, LedgerSpeaker, TolerancePolicy};
pub use spec::{CellSpec, DatasetSpec, SynthSpec, TokenDist};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synth spec: {0}")]
    SpecInvalid(String),
    #[error("ledger does not belong to this corpus: {0}")]
    LedgerMismatch(String),
    #[error(transparent)]
    Interchange(#[from] crate::interchange::InterchangeError),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interchange::{validate_corpus, Level};
    use crate::profiles::profile_corpus;

    #[test]
    fn default_spec_validates_and_matches_ledger() {
        let spec = SynthSpec::default();
        let out = generate_corpus(&spec).unwrap();
        let c = &out.corpora[0];
        let report = validate_corpus(c, &out.feature_configs);
        assert_eq!(report.count(Level::Error), 0, "{:?}", report.findings);
        let table = profile_corpus(c, &out.feature_configs);
        assert_eq!(table.len(), spec.n_speakers());
        let check = ledger_check(c, &out.ledger, &table, TolerancePolicy::default()).unwrap();
        assert!(check.passed(), "{check:?}");
    }

    #[test]
    fn deterministic() {
        let spec = SynthSpec { seed: 9, ..SynthSpec::default() };
        let a = generate_corpus(&spec).unwrap();
        let b = generate_corpus(&spec).unwrap();
        assert_eq!(a.corpora[0].embeddings(), b.corpora[0].embeddings());
        assert_eq!(a.corpora[0].tokens().to_tsv().unwrap(), b.corpora[0].tokens().to_tsv().unwrap());
        assert_eq!(a.ledger, b.ledger);
    }

    #[test]
    fn ledger_from_other_seed_is_rejected() {
        let a = generate_corpus(&SynthSpec { seed: 1, ..SynthSpec::default() }).unwrap();
        let b = generate_corpus(&SynthSpec { seed: 2, ..SynthSpec::default() }).unwrap();
        let table = profile_corpus(&a.corpora[0], &a.feature_configs);
        let err = ledger_check(&a.corpora[0], &b.ledger, &table, TolerancePolicy::default());
        assert!(matches!(err, Err(SynthError::LedgerMismatch(_))));
    }

    #[test]
    fn near_zero_noise_reports_degenerate_cells() {
        let spec = SynthSpec { sigma: 1e-12, speaker_offset_sd: 0.0, ..SynthSpec::default() };
        let out = generate_corpus(&spec).unwrap();
        let c = &out.corpora[0];
        let table = profile_corpus(c, &out.feature_configs);
        assert!(table.findings.iter().any(|f| f.message.contains("pooled standard deviation")));
        let check = ledger_check(c, &out.ledger, &table, TolerancePolicy::default()).unwrap();
        assert!(!check.missing.is_empty());
        assert!(!check.passed());
    }

    #[test]
    fn invalid_specs() {
        for bad in [
            SynthSpec { sigma: 0.0, ..SynthSpec::default() },
            SynthSpec { dim: 4, ..SynthSpec::default() },
            SynthSpec { datasets: vec![], ..SynthSpec::default() },
        ] {
            assert!(matches!(generate_corpus(&bad), Err(SynthError::SpecInvalid(_))));
        }
        let mut s = SynthSpec::default();
        s.severity_multipliers.insert(crate::interchange::Severity::Mild, 1.5);
        assert!(s.validate().is_err());
        assert!(SynthSpec::from_json(r#"{"bogus": 1}"#).is_err());
        let json = serde_json::to_string(&SynthSpec::default()).unwrap();
        assert_eq!(SynthSpec::from_json(&json).unwrap(), SynthSpec::default());
    }
}
