//! In-memory corpus for one backbone, plus the on-disk layout:
//!
//! ```text
//! <root>/manifest.json
//! <root>/tokens.tsv
//! <root>/embeddings/<backbone_id>/embeddings.phem
//! <root>/embeddings/<backbone_id>/rows.tsv
//! ```

use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use super::config::normalize_label;
use super::error::{InterchangeError, Result};
use super::manifest::{Manifest, SpeakerMeta};
use super::phem::{parse_rows_tsv, rows_to_tsv, EmbeddingMatrix, RowRef};
use super::textgrid::TierSet;
use super::tokens::{Tier, Token, TokenTable};

/// A non-empty phone token with its embedding row.
#[derive(Debug, Clone, PartialEq)]
pub struct Phone {
    /// NFC-normalized label.
    pub label: Arc<str>,
    pub start_s: f64,
    pub end_s: f64,
    pub row: usize,
}

impl Phone {
    pub fn duration(&self) -> f64 {
        self.end_s - self.start_s
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Span {
    pub start_s: f64,
    pub end_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Utterance {
    pub id: Arc<str>,
    /// Non-empty phones in time order.
    pub phones: Vec<Phone>,
    /// Non-empty words in time order.
    pub words: Vec<Span>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SpeakerTokens {
    pub utterances: Vec<Utterance>,
}

impl SpeakerTokens {
    pub fn phones(&self) -> impl Iterator<Item = &Phone> {
        self.utterances.iter().flat_map(|u| u.phones.iter())
    }

    pub fn n_phones(&self) -> usize {
        self.utterances.iter().map(|u| u.phones.len()).sum()
    }

    pub fn has_word_tier(&self) -> bool {
        self.utterances.iter().any(|u| !u.words.is_empty())
    }
}

#[derive(Debug, Clone)]
pub struct Corpus {
    manifest: Arc<Manifest>,
    tokens: Arc<TokenTable>,
    backbone_id: String,
    embeddings: EmbeddingMatrix,
    rows: Vec<RowRef>,
    speakers: Vec<SpeakerTokens>,
}

impl Corpus {
    /// Assembles a corpus, checking the token/row bijection.
    pub fn new(
        manifest: Arc<Manifest>,
        tokens: Arc<TokenTable>,
        backbone_id: impl Into<String>,
        embeddings: EmbeddingMatrix,
        rows: Vec<RowRef>,
    ) -> Result<Self> {
        let backbone_id = backbone_id.into();
        manifest.validate()?;
        if backbone_id == manifest.backbone_id && embeddings.dim() != manifest.dim {
            return Err(InterchangeError::DimMismatch {
                manifest: manifest.dim,
                binary: embeddings.dim(),
            });
        }
        if rows.len() != embeddings.n_rows() {
            return Err(InterchangeError::RowCountMismatch {
                index_rows: rows.len(),
                binary_rows: embeddings.n_rows(),
            });
        }

        let speaker_index: HashMap<&str, usize> = manifest
            .speakers
            .iter()
            .enumerate()
            .map(|(i, s)| (s.speaker_id.as_str(), i))
            .collect();

        // utterance -> (speaker index, token indices)
        let mut by_utt: HashMap<&str, (usize, Vec<usize>)> = HashMap::new();
        for (ti, t) in tokens.rows.iter().enumerate() {
            let &si = speaker_index
                .get(&*t.speaker_id)
                .ok_or_else(|| InterchangeError::UnknownSpeaker(t.speaker_id.to_string()))?;
            match by_utt.entry(&t.utterance_id) {
                Entry::Occupied(mut e) => {
                    let (owner, list) = e.get_mut();
                    if *owner != si {
                        return Err(InterchangeError::SharedUtterance {
                            utterance_id: t.utterance_id.to_string(),
                            first: manifest.speakers[*owner].speaker_id.clone(),
                            second: t.speaker_id.to_string(),
                        });
                    }
                    list.push(ti);
                }
                Entry::Vacant(e) => {
                    e.insert((si, vec![ti]));
                }
            }
        }

        let mut labels: HashMap<Arc<str>, Arc<str>> = HashMap::new();
        let mut utt_ids: Vec<&str> = by_utt.keys().copied().collect();
        utt_ids.sort_unstable();

        let mut speakers = vec![SpeakerTokens::default(); manifest.speakers.len()];
        // (utterance, ordinal) -> (speaker, utterance slot, phone slot)
        let mut slots: HashMap<(&str, usize), (usize, usize, usize)> = HashMap::new();
        for utt in &utt_ids {
            let (si, idx) = &by_utt[utt];
            let mut phone_idx: Vec<&Token> = idx
                .iter()
                .map(|&i| &tokens.rows[i])
                .filter(|t| t.tier == Tier::Phone && !t.label.is_empty())
                .collect();
            phone_idx.sort_by(|a, b| a.start_s.total_cmp(&b.start_s));
            let mut words: Vec<Span> = idx
                .iter()
                .map(|&i| &tokens.rows[i])
                .filter(|t| t.tier == Tier::Word && !t.label.is_empty())
                .map(|t| Span { start_s: t.start_s, end_s: t.end_s })
                .collect();
            words.sort_by(|a, b| a.start_s.total_cmp(&b.start_s));
            let phones = phone_idx
                .iter()
                .map(|t| {
                    let label = labels
                        .entry(t.label.clone())
                        .or_insert_with(|| Arc::from(normalize_label(&t.label)))
                        .clone();
                    Phone {
                        label,
                        start_s: t.start_s,
                        end_s: t.end_s,
                        row: usize::MAX,
                    }
                })
                .collect::<Vec<_>>();
            let uslot = speakers[*si].utterances.len();
            for ord in 0..phones.len() {
                slots.insert((utt, ord), (*si, uslot, ord));
            }
            speakers[*si].utterances.push(Utterance {
                id: tokens.rows[idx[0]].utterance_id.clone(),
                phones,
                words,
            });
        }

        for (r, rr) in rows.iter().enumerate() {
            let key = (rr.utterance_id.as_str(), rr.token_ordinal);
            let &(si, us, ps) = slots.get(&key).ok_or_else(|| InterchangeError::UnknownRowTarget {
                row: r,
                utterance_id: rr.utterance_id.clone(),
                ordinal: rr.token_ordinal,
            })?;
            let phone = &mut speakers[si].utterances[us].phones[ps];
            if phone.row != usize::MAX {
                return Err(InterchangeError::DuplicateRow {
                    first: phone.row,
                    second: r,
                    utterance_id: rr.utterance_id.clone(),
                    ordinal: rr.token_ordinal,
                });
            }
            phone.row = r;
        }
        for sp in &speakers {
            for u in &sp.utterances {
                if let Some(ord) = u.phones.iter().position(|p| p.row == usize::MAX) {
                    return Err(InterchangeError::OrphanToken {
                        utterance_id: u.id.to_string(),
                        ordinal: ord,
                    });
                }
            }
        }

        Ok(Corpus {
            manifest,
            tokens,
            backbone_id,
            embeddings,
            rows,
            speakers,
        })
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    pub fn manifest_arc(&self) -> Arc<Manifest> {
        self.manifest.clone()
    }

    pub fn tokens(&self) -> &TokenTable {
        &self.tokens
    }

    pub fn tokens_arc(&self) -> Arc<TokenTable> {
        self.tokens.clone()
    }

    pub fn backbone_id(&self) -> &str {
        &self.backbone_id
    }

    pub fn dim(&self) -> usize {
        self.embeddings.dim()
    }

    pub fn embeddings(&self) -> &EmbeddingMatrix {
        &self.embeddings
    }

    pub fn rows(&self) -> &[RowRef] {
        &self.rows
    }

    pub fn embedding(&self, row: usize) -> &[f32] {
        self.embeddings.row(row)
    }

    pub fn n_speakers(&self) -> usize {
        self.speakers.len()
    }

    /// Speaker metadata and tokens, in manifest order.
    pub fn speakers(&self) -> impl Iterator<Item = (&SpeakerMeta, &SpeakerTokens)> {
        self.manifest.speakers.iter().zip(&self.speakers)
    }

    pub fn speaker(&self, index: usize) -> (&SpeakerMeta, &SpeakerTokens) {
        (&self.manifest.speakers[index], &self.speakers[index])
    }

    pub fn speaker_index(&self, id: &str) -> Option<usize> {
        self.manifest.speakers.iter().position(|s| s.speaker_id == id)
    }

    /// Speakers listed in the manifest with no phone tokens.
    pub fn token_free_speakers(&self) -> Vec<&str> {
        self.speakers()
            .filter(|(_, t)| t.n_phones() == 0)
            .map(|(m, _)| m.speaker_id.as_str())
            .collect()
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| InterchangeError::io(path, e))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| InterchangeError::io(path, e))
}

pub fn embeddings_dir(root: &Path, backbone_id: &str) -> PathBuf {
    root.join("embeddings").join(backbone_id)
}

/// Reads the corpus at `root` with the embeddings of `backbone_id`.
pub fn read_corpus(root: &Path, backbone_id: &str) -> Result<Corpus> {
    let manifest = Manifest::from_json(&read_text(&root.join("manifest.json"))?)?;
    let tokens = TokenTable::parse_tsv(&read_text(&root.join("tokens.tsv"))?)?;
    read_corpus_with(root, Arc::new(manifest), Arc::new(tokens), backbone_id)
}

/// Reads one backbone's embeddings against an already-loaded manifest and
/// token table.
pub fn read_corpus_with(
    root: &Path,
    manifest: Arc<Manifest>,
    tokens: Arc<TokenTable>,
    backbone_id: &str,
) -> Result<Corpus> {
    let dir = embeddings_dir(root, backbone_id);
    let phem_path = dir.join("embeddings.phem");
    let bytes = fs::read(&phem_path).map_err(|e| InterchangeError::io(&phem_path, e))?;
    let embeddings = EmbeddingMatrix::decode(&bytes)?;
    let rows = parse_rows_tsv(&read_text(&dir.join("rows.tsv"))?)?;
    Corpus::new(manifest, tokens, backbone_id, embeddings, rows)
}

/// Writes the manifest, token table, and this backbone's embeddings.
pub fn write_corpus(root: &Path, corpus: &Corpus) -> Result<()> {
    let dir = embeddings_dir(root, corpus.backbone_id());
    fs::create_dir_all(&dir).map_err(|e| InterchangeError::io(&dir, e))?;
    write_bytes(&root.join("manifest.json"), corpus.manifest().to_json().as_bytes())?;
    write_bytes(&root.join("tokens.tsv"), corpus.tokens().to_tsv()?.as_bytes())?;
    write_bytes(&dir.join("embeddings.phem"), &corpus.embeddings().encode())?;
    write_bytes(&dir.join("rows.tsv"), rows_to_tsv(corpus.rows()).as_bytes())
}

/// Converts the phone and word tiers of one aligned utterance into token
/// rows. Empty-label intervals (silences) are dropped.
pub fn tokens_from_textgrid(
    speaker_id: &str,
    utterance_id: &str,
    grid: &TierSet,
    phone_tier: &str,
    word_tier: &str,
) -> Result<Vec<Token>> {
    let phones = grid.tier(phone_tier).ok_or_else(|| InterchangeError::TextGridSyntax {
        line: 0,
        message: format!("no tier named {phone_tier:?}"),
    })?;
    let speaker: Arc<str> = Arc::from(speaker_id);
    let utt: Arc<str> = Arc::from(utterance_id);
    let mut out = Vec::new();
    let tiers = [(Some(phones), Tier::Phone), (grid.tier(word_tier), Tier::Word)];
    for (tier, kind) in tiers {
        let Some(tier) = tier else { continue };
        for iv in tier.intervals.iter().filter(|iv| !iv.text.trim().is_empty()) {
            out.push(Token {
                speaker_id: speaker.clone(),
                utterance_id: utt.clone(),
                tier: kind,
                label: Arc::from(iv.text.trim()),
                start_s: iv.xmin,
                end_s: iv.xmax,
            });
        }
    }
    Ok(out)
}
