use std::collections::HashMap;
use std::fmt;
use std::fmt::Write as _;
use std::sync::Arc;

use super::error::{InterchangeError, Result};

pub const TOKENS_HEADER: &str = "speaker_id\tutterance_id\ttier\tlabel\tstart_s\tend_s";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tier {
    Phone,
    Word,
}

impl Tier {
    pub fn as_str(self) -> &'static str {
        match self {
            Tier::Phone => "phone",
            Tier::Word => "word",
        }
    }
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub speaker_id: Arc<str>,
    pub utterance_id: Arc<str>,
    pub tier: Tier,
    pub label: Arc<str>,
    pub start_s: f64,
    pub end_s: f64,
}

impl Token {
    pub fn duration(&self) -> f64 {
        self.end_s - self.start_s
    }
}

/// Row-level token table. Order is whatever was read or pushed; the TSV
/// writer emits the canonical order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TokenTable {
    pub rows: Vec<Token>,
}

#[derive(Default)]
struct Interner(HashMap<String, Arc<str>>);

impl Interner {
    fn get(&mut self, s: &str) -> Arc<str> {
        if let Some(a) = self.0.get(s) {
            return a.clone();
        }
        let a: Arc<str> = Arc::from(s);
        self.0.insert(s.to_owned(), a.clone());
        a
    }
}

fn tsv_err(line: usize, message: impl Into<String>) -> InterchangeError {
    InterchangeError::Tsv {
        file: "tokens.tsv".into(),
        line,
        message: message.into(),
    }
}

/// Decimal seconds with six places, '.' separator.
pub(crate) fn fmt_seconds(out: &mut String, x: f64) {
    write!(out, "{x:.6}").expect("writing to String");
}

impl TokenTable {
    pub fn parse_tsv(text: &str) -> Result<Self> {
        let mut lines = text.split('\n').enumerate();
        match lines.next() {
            Some((_, h)) if h.trim_end_matches('\r') == TOKENS_HEADER => {}
            _ => return Err(tsv_err(1, format!("header must be exactly {TOKENS_HEADER:?}"))),
        }
        let mut interner = Interner::default();
        let mut rows = Vec::new();
        for (i, line) in lines {
            let line = line.trim_end_matches('\r');
            if line.is_empty() {
                continue;
            }
            let lineno = i + 1;
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 6 {
                return Err(tsv_err(lineno, format!("expected 6 columns, found {}", cols.len())));
            }
            let tier = match cols[2] {
                "phone" => Tier::Phone,
                "word" => Tier::Word,
                other => return Err(tsv_err(lineno, format!("unknown tier {other:?}"))),
            };
            let time = |s: &str| -> Result<f64> {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| tsv_err(lineno, format!("bad time value {s:?}")))
            };
            if cols[0].is_empty() || cols[1].is_empty() {
                return Err(tsv_err(lineno, "empty speaker_id or utterance_id"));
            }
            rows.push(Token {
                speaker_id: interner.get(cols[0]),
                utterance_id: interner.get(cols[1]),
                tier,
                label: interner.get(cols[3]),
                start_s: time(cols[4])?,
                end_s: time(cols[5])?,
            });
        }
        Ok(TokenTable { rows })
    }

    /// Rows sorted by utterance, tier, start time (ties keep input order).
    pub fn canonical_order(&self) -> Vec<&Token> {
        let mut v: Vec<&Token> = self.rows.iter().collect();
        v.sort_by(|a, b| {
            a.utterance_id
                .cmp(&b.utterance_id)
                .then(a.tier.cmp(&b.tier))
                .then(a.start_s.total_cmp(&b.start_s))
        });
        v
    }

    pub fn to_tsv(&self) -> Result<String> {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(TOKENS_HEADER);
        out.push('\n');
        for t in self.canonical_order() {
            for field in [&*t.speaker_id, &*t.utterance_id, &*t.label] {
                if field.contains(['\t', '\n', '\r']) {
                    return Err(tsv_err(0, format!("field {field:?} contains a tab or newline")));
                }
            }
            out.push_str(&t.speaker_id);
            out.push('\t');
            out.push_str(&t.utterance_id);
            out.push('\t');
            out.push_str(t.tier.as_str());
            out.push('\t');
            out.push_str(&t.label);
            out.push('\t');
            fmt_seconds(&mut out, t.start_s);
            out.push('\t');
            fmt_seconds(&mut out, t.end_s);
            out.push('\n');
        }
        Ok(out)
    }
}
