#![allow(dead_code)]

use std::sync::OnceLock;

use phonoscope::profiles::profile_corpus;
use phonoscope::synth::{generate_corpus, SynthCorpus, SynthSpec};
use phonoscope::ProfileTable;

pub fn synth() -> &'static SynthCorpus {
    static S: OnceLock<SynthCorpus> = OnceLock::new();
    S.get_or_init(|| generate_corpus(&SynthSpec::default()).expect("default spec generates"))
}

pub fn table() -> &'static ProfileTable {
    static T: OnceLock<ProfileTable> = OnceLock::new();
    T.get_or_init(|| {
        let s = synth();
        profile_corpus(&s.corpora[0], &s.feature_configs)
    })
}
