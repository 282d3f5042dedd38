//! PHEM embedding binaries.
//!
//! Layout, all little-endian:
//!
//! | bytes  | content                         |
//! |--------|---------------------------------|
//! | 0..4   | ASCII `PHEM`                    |
//! | 4..8   | u32 version, always 1           |
//! | 8..12  | u32 `n_rows`                    |
//! | 12..16 | u32 `dim`                       |
//! | 16..   | `n_rows * dim` f32, row-major   |
//!
//! No padding and no footer.

use std::fmt::Write as _;

use super::error::{InterchangeError, Result};

pub const MAGIC: &[u8; 4] = b"PHEM";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 16;
pub const ROWS_HEADER: &str = "row\tutterance_id\ttoken_ordinal";

/// Dense row-major `n_rows x dim` matrix of binary32 values.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    dim: usize,
    data: Vec<f32>,
}

impl EmbeddingMatrix {
    pub fn new(dim: usize, data: Vec<f32>) -> Self {
        assert!(dim > 0, "embedding dim must be positive");
        assert_eq!(data.len() % dim, 0, "data length must be a multiple of dim");
        EmbeddingMatrix { dim, data }
    }

    pub fn from_rows(dim: usize, rows: &[Vec<f32>]) -> Self {
        let mut data = Vec::with_capacity(dim * rows.len());
        for r in rows {
            assert_eq!(r.len(), dim);
            data.extend_from_slice(r);
        }
        EmbeddingMatrix::new(dim, data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_rows(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(InterchangeError::TruncatedBinary {
                expected: HEADER_LEN,
                actual: bytes.len(),
            });
        }
        if &bytes[0..4] != MAGIC {
            return Err(InterchangeError::BadMagic);
        }
        let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
        let version = word(4);
        if version != VERSION {
            return Err(InterchangeError::UnsupportedVersion(version));
        }
        let n_rows = word(8) as usize;
        let dim = word(12) as usize;
        if dim == 0 {
            return Err(InterchangeError::DimMismatch {
                manifest: 0,
                binary: 0,
            });
        }
        let payload = n_rows
            .checked_mul(dim)
            .and_then(|n| n.checked_mul(4))
            .ok_or(InterchangeError::TruncatedBinary {
                expected: usize::MAX,
                actual: bytes.len(),
            })?;
        let expected = HEADER_LEN + payload;
        if bytes.len() < expected {
            return Err(InterchangeError::TruncatedBinary {
                expected,
                actual: bytes.len(),
            });
        }
        if bytes.len() > expected {
            return Err(InterchangeError::TrailingBytes(bytes.len() - expected));
        }
        let data = bytes[HEADER_LEN..]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(EmbeddingMatrix { dim, data })
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 4 * self.data.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(self.n_rows() as u32).to_le_bytes());
        out.extend_from_slice(&(self.dim as u32).to_le_bytes());
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }
}

/// One line of `rows.tsv`: embedding row -> phone token of an utterance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowRef {
    pub utterance_id: String,
    pub token_ordinal: usize,
}

fn rows_err(line: usize, message: impl Into<String>) -> InterchangeError {
    InterchangeError::Tsv {
        file: "rows.tsv".into(),
        line,
        message: message.into(),
    }
}

pub fn parse_rows_tsv(text: &str) -> Result<Vec<RowRef>> {
    let mut lines = text.split('\n').enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end_matches('\r') == ROWS_HEADER => {}
        _ => return Err(rows_err(1, format!("header must be exactly {ROWS_HEADER:?}"))),
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 3 {
            return Err(rows_err(i + 1, format!("expected 3 columns, found {}", cols.len())));
        }
        let row: usize = cols[0]
            .parse()
            .map_err(|_| rows_err(i + 1, format!("bad row index {:?}", cols[0])))?;
        if row != out.len() {
            return Err(rows_err(i + 1, format!("row {row} out of sequence (expected {})", out.len())));
        }
        let token_ordinal = cols[2]
            .parse()
            .map_err(|_| rows_err(i + 1, format!("bad token ordinal {:?}", cols[2])))?;
        out.push(RowRef {
            utterance_id: cols[1].to_owned(),
            token_ordinal,
        });
    }
    Ok(out)
}

pub fn rows_to_tsv(rows: &[RowRef]) -> String {
    let mut out = String::with_capacity(24 * (rows.len() + 1));
    out.push_str(ROWS_HEADER);
    out.push('\n');
    for (i, r) in rows.iter().enumerate() {
        writeln!(out, "{i}\t{}\t{}", r.utterance_id, r.token_ordinal).expect("writing to String");
    }
    out
}
