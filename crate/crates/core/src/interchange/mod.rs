//! Corpus interchange: manifest JSON, token TSV, PHEM embedding binaries,
//! TextGrids, and feature configurations.

mod config;
mod corpus;
mod error;
mod manifest;
mod phem;
mod textgrid;
mod tokens;
mod validate;

pub use config::{
    load_feature_config_dir, normalize_label, FeatureClasses, FeatureConfig, FeatureConfigs,
    SegmentalFeature, Side,
};
pub use corpus::{
    embeddings_dir, read_corpus, read_corpus_with, tokens_from_textgrid, write_corpus, Corpus,
    Phone, SpeakerTokens, Span, Utterance,
};
pub use error::{InterchangeError, Result};
pub use manifest::{Aetiology, Manifest, Severity, SeveritySource, SpeakerMeta};
pub use phem::{parse_rows_tsv, rows_to_tsv, EmbeddingMatrix, RowRef};
pub use textgrid::{parse_textgrid, write_textgrid, Interval, IntervalTier, TierSet};
pub use tokens::{Tier, Token, TokenTable};
pub use validate::{validate_corpus, Finding, Level, SpeakerCounts, ValidationReport, MIN_TOKENS_PER_CLASS};
