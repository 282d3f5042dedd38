//! Phonological-subspace d-prime profiling of speakers from phone-aligned
//! embeddings, and the statistical analyses that run over the resulting
//! profile tables.
//!
//! The crate is organised bottom-up:
//!
//! * [`interchange`] reads and writes the corpus layout (manifest, token
//!   table, PHEM embedding binaries, TextGrids, feature configurations).
//! * [`profiles`] estimates healthy-control feature directions and computes
//!   the 15-feature speaker profile.
//! * [`stats`] is the self-contained statistical kernel.
//! * [`analyses`] runs the experiment suite over a [`profiles::ProfileTable`].
//! * [`synth`] generates corpora with planted ground truth.
//!
//! Data-parallel loops go through [`par`], which uses rayon when the
//! `parallel` feature is enabled (the default) and plain iterators otherwise.

pub mod analyses;
pub mod interchange;
pub mod par;
pub mod profiles;
pub mod rng;
pub mod stats;
pub mod synth;

pub use analyses::{AnalysisError, AnalysisReport};
pub use interchange::{Corpus, FeatureConfig, InterchangeError, Manifest, SpeakerMeta};
pub use profiles::{Feature, FeatureSubset, ProfileTable, SpeakerProfile};
pub use stats::StatsError;
