//! Long-form ("ooTextFile") Praat TextGrid reader and writer.
//!
//! Only interval tiers are returned; point tiers are parsed and skipped.
//! Short-form and binary TextGrids are rejected.

use std::fmt::Write as _;

use super::error::{InterchangeError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Interval {
    pub xmin: f64,
    pub xmax: f64,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntervalTier {
    pub name: String,
    pub xmin: f64,
    pub xmax: f64,
    pub intervals: Vec<Interval>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TierSet {
    pub xmin: f64,
    pub xmax: f64,
    pub tiers: Vec<IntervalTier>,
}

impl TierSet {
    pub fn tier(&self, name: &str) -> Option<&IntervalTier> {
        self.tiers.iter().find(|t| t.name == name)
    }
}

/// Slack for adjacent intervals whose shared boundary was printed with
/// different rounding.
const BOUNDARY_EPS: f64 = 1e-9;

struct Cursor<'a> {
    lines: Vec<&'a str>,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        let text = text.strip_prefix('\u{feff}').unwrap_or(text);
        Cursor {
            lines: text.lines().collect(),
            pos: 0,
        }
    }

    fn lineno(&self) -> usize {
        self.pos
    }

    fn err(&self, message: impl Into<String>) -> InterchangeError {
        InterchangeError::TextGridSyntax {
            line: self.lineno(),
            message: message.into(),
        }
    }

    /// Next non-blank line, trimmed.
    fn next_line(&mut self) -> Option<&'a str> {
        while self.pos < self.lines.len() {
            let line = self.lines[self.pos].trim();
            self.pos += 1;
            if !line.is_empty() {
                return Some(line);
            }
        }
        None
    }

    fn peek_line(&self) -> Option<&'a str> {
        self.lines[self.pos.min(self.lines.len())..]
            .iter()
            .map(|l| l.trim())
            .find(|l| !l.is_empty())
    }

    /// Reads `key = value` and returns the raw value text.
    fn keyed(&mut self, key: &str) -> Result<&'a str> {
        let line = self
            .next_line()
            .ok_or_else(|| self.err(format!("unexpected end of file, expected {key:?}")))?;
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| self.err(format!("expected \"{key} = ...\", found {line:?}")))?;
        if k.trim() != key {
            return Err(self.err(format!("expected key {key:?}, found {:?}", k.trim())));
        }
        Ok(v.trim())
    }

    fn number(&mut self, key: &str) -> Result<f64> {
        let raw = self.keyed(key)?;
        raw.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| self.err(format!("{key}: {raw:?} is not a finite number")))
    }

    fn count(&mut self, key: &str) -> Result<usize> {
        let raw = self.keyed(key)?;
        raw.parse::<usize>()
            .map_err(|_| self.err(format!("{key}: {raw:?} is not a count")))
    }

    /// Reads `key = "..."`, where the string may continue over several lines
    /// and embedded quotes are doubled.
    fn string(&mut self, key: &str) -> Result<String> {
        let start = self.keyed(key)?;
        let Some(body) = start.strip_prefix('"') else {
            return Err(self.err(format!("{key}: expected a quoted string")));
        };
        let mut out = String::new();
        let mut chunk = body;
        loop {
            let mut chars = chunk.char_indices().peekable();
            while let Some((_, c)) = chars.next() {
                if c == '"' {
                    if matches!(chars.peek(), Some((_, '"'))) {
                        chars.next();
                        out.push('"');
                    } else {
                        let rest: String = chars.map(|(_, c)| c).collect();
                        if !rest.trim().is_empty() {
                            return Err(self.err(format!("{key}: trailing text after string")));
                        }
                        return Ok(out);
                    }
                } else {
                    out.push(c);
                }
            }
            if self.pos >= self.lines.len() {
                return Err(self.err(format!("{key}: unterminated string")));
            }
            out.push('\n');
            chunk = self.lines[self.pos];
            self.pos += 1;
        }
    }

    fn marker(&mut self, expected_prefix: &str) -> Result<&'a str> {
        let line = self
            .next_line()
            .ok_or_else(|| self.err(format!("unexpected end of file, expected {expected_prefix:?}")))?;
        if !line.starts_with(expected_prefix) {
            return Err(self.err(format!("expected {expected_prefix:?}, found {line:?}")));
        }
        Ok(line)
    }
}

fn header_value(line: Option<&str>, key: &str) -> Option<String> {
    let (k, v) = line?.split_once('=')?;
    if k.trim() != key {
        return None;
    }
    let v = v.trim();
    Some(v.strip_prefix('"')?.strip_suffix('"')?.to_owned())
}

/// Parses a long-form TextGrid.
pub fn parse_textgrid(text: &str) -> Result<TierSet> {
    let mut cur = Cursor::new(text);
    let first = cur.next_line();
    match header_value(first, "File type").as_deref() {
        Some("ooTextFile") => {}
        Some("ooBinaryFile") => {
            return Err(InterchangeError::UnsupportedTextGrid("binary TextGrid".into()))
        }
        _ => {
            return Err(InterchangeError::MalformedHeader(format!(
                "expected File type = \"ooTextFile\", found {:?}",
                first.unwrap_or("")
            )))
        }
    }
    let second = cur.next_line();
    if header_value(second, "Object class").as_deref() != Some("TextGrid") {
        return Err(InterchangeError::MalformedHeader(format!(
            "expected Object class = \"TextGrid\", found {:?}",
            second.unwrap_or("")
        )));
    }
    match cur.peek_line() {
        Some(l) if l.starts_with("xmin") => {}
        _ => {
            return Err(InterchangeError::UnsupportedTextGrid(
                "short-form TextGrid (no \"xmin =\" key)".into(),
            ))
        }
    }
    let xmin = cur.number("xmin")?;
    let xmax = cur.number("xmax")?;
    let exists = cur.marker("tiers?")?;
    if !exists.contains("<exists>") {
        return Ok(TierSet { xmin, xmax, tiers: Vec::new() });
    }
    let n_tiers = cur.count("size")?;
    cur.marker("item []")?;

    let mut tiers = Vec::new();
    for t in 0..n_tiers {
        if cur.peek_line().is_none() {
            return Err(cur.err(format!("expected {n_tiers} tiers, found {t}")));
        }
        cur.marker("item [")?;
        let class = cur.string("class")?;
        let name = cur.string("name")?;
        let txmin = cur.number("xmin")?;
        let txmax = cur.number("xmax")?;
        match class.as_str() {
            "IntervalTier" => {
                let declared = cur.count("intervals: size")?;
                let mut intervals = Vec::new();
                for i in 0..declared {
                    match cur.peek_line() {
                        Some(l) if l.starts_with("intervals [") => {}
                        _ => {
                            return Err(InterchangeError::TruncatedTier {
                                tier: name,
                                declared,
                                parsed: i,
                            })
                        }
                    }
                    cur.marker("intervals [")?;
                    let a = cur.number("xmin")?;
                    let b = cur.number("xmax")?;
                    let text = cur.string("text")?;
                    let overlaps_prev = intervals
                        .last()
                        .is_some_and(|p: &Interval| a < p.xmax - BOUNDARY_EPS);
                    if b <= a || overlaps_prev {
                        return Err(InterchangeError::NonMonotoneIntervals { tier: name, index: i });
                    }
                    intervals.push(Interval { xmin: a, xmax: b, text });
                }
                tiers.push(IntervalTier {
                    name,
                    xmin: txmin,
                    xmax: txmax,
                    intervals,
                });
            }
            "TextTier" => {
                let declared = cur.count("points: size")?;
                for i in 0..declared {
                    match cur.peek_line() {
                        Some(l) if l.starts_with("points [") => {}
                        _ => {
                            return Err(InterchangeError::TruncatedTier {
                                tier: name,
                                declared,
                                parsed: i,
                            })
                        }
                    }
                    cur.marker("points [")?;
                    cur.number("number")?;
                    cur.string("mark")?;
                }
            }
            other => return Err(cur.err(format!("unknown tier class {other:?}"))),
        }
    }
    Ok(TierSet { xmin, xmax, tiers })
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

/// Writes the long-form text representation.
pub fn write_textgrid(set: &TierSet) -> String {
    let mut o = String::new();
    let w = &mut o;
    writeln!(w, "File type = \"ooTextFile\"").unwrap();
    writeln!(w, "Object class = \"TextGrid\"").unwrap();
    writeln!(w).unwrap();
    writeln!(w, "xmin = {}", set.xmin).unwrap();
    writeln!(w, "xmax = {}", set.xmax).unwrap();
    if set.tiers.is_empty() {
        writeln!(w, "tiers? <absent>").unwrap();
        return o;
    }
    writeln!(w, "tiers? <exists>").unwrap();
    writeln!(w, "size = {}", set.tiers.len()).unwrap();
    writeln!(w, "item []:").unwrap();
    for (i, tier) in set.tiers.iter().enumerate() {
        writeln!(w, "    item [{}]:", i + 1).unwrap();
        writeln!(w, "        class = \"IntervalTier\"").unwrap();
        writeln!(w, "        name = {}", quote(&tier.name)).unwrap();
        writeln!(w, "        xmin = {}", tier.xmin).unwrap();
        writeln!(w, "        xmax = {}", tier.xmax).unwrap();
        writeln!(w, "        intervals: size = {}", tier.intervals.len()).unwrap();
        for (j, iv) in tier.intervals.iter().enumerate() {
            writeln!(w, "        intervals [{}]:", j + 1).unwrap();
            writeln!(w, "            xmin = {}", iv.xmin).unwrap();
            writeln!(w, "            xmax = {}", iv.xmax).unwrap();
            writeln!(w, "            text = {}", quote(&iv.text)).unwrap();
        }
    }
    o
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const MINIMAL: &str = r#"File type = "ooTextFile"
Object class = "TextGrid"

xmin = 0
xmax = 0.25
tiers? <exists>
size = 1
item []:
    item [1]:
        class = "IntervalTier"
        name = "phones"
        xmin = 0
        xmax = 0.25
        intervals: size = 1
        intervals [1]:
            xmin = 0.00
            xmax = 0.25
            text = "a"
"#;

    const MFA_STYLE: &str = r#"File type = "ooTextFile"
Object class = "TextGrid"

xmin = 0 
xmax = 1.2 
tiers? <exists> 
size = 3 
item []: 
    item [1]:
        class = "IntervalTier" 
        name = "words" 
        xmin = 0 
        xmax = 1.2 
        intervals: size = 3 
        intervals [1]:
            xmin = 0 
            xmax = 0.4 
            text = "say" 
        intervals [2]:
            xmin = 0.4 
            xmax = 0.6 
            text = "" 
        intervals [3]:
            xmin = 0.6 
            xmax = 1.2 
            text = "he said ""hi""" 
    item [2]:
        class = "TextTier" 
        name = "events" 
        xmin = 0 
        xmax = 1.2 
        points: size = 1 
        points [1]:
            number = 0.5 
            mark = "click" 
    item [3]:
        class = "IntervalTier" 
        name = "phones" 
        xmin = 0 
        xmax = 1.2 
        intervals: size = 2 
        intervals [1]:
            xmin = 0 
            xmax = 0.2 
            text = "s" 
        intervals [2]:
            xmin = 0.2 
            xmax = 0.4 
            text = "eɪ" 
"#;

    #[test]
    fn minimal_fixture() {
        let set = parse_textgrid(MINIMAL).unwrap();
        assert_eq!(set.tiers.len(), 1);
        let tier = set.tier("phones").unwrap();
        assert_eq!(tier.intervals.len(), 1);
        assert_eq!(tier.intervals[0].text, "a");
        assert_eq!(tier.intervals[0].xmin, 0.0);
        assert_eq!(tier.intervals[0].xmax, 0.25);
    }

    #[test]
    fn mfa_style_with_point_tier_and_escapes() {
        let set = parse_textgrid(MFA_STYLE).unwrap();
        assert_eq!(set.tiers.len(), 2);
        let words = set.tier("words").unwrap();
        assert_eq!(words.intervals[1].text, "");
        assert_eq!(words.intervals[2].text, "he said \"hi\"");
        assert_eq!(set.tier("phones").unwrap().intervals[1].text, "eɪ");
    }

    #[test]
    fn empty_tier() {
        let text = MINIMAL.replace("intervals: size = 1", "intervals: size = 0");
        let text = text.split("        intervals [1]:").next().unwrap().to_owned();
        let set = parse_textgrid(&text).unwrap();
        assert!(set.tiers[0].intervals.is_empty());
    }

    #[test]
    fn wrong_magic() {
        assert!(matches!(
            parse_textgrid("WRONG\n"),
            Err(InterchangeError::MalformedHeader(_))
        ));
        assert!(matches!(parse_textgrid(""), Err(InterchangeError::MalformedHeader(_))));
    }

    #[test]
    fn short_form_and_binary_rejected() {
        let short = "File type = \"ooTextFile\"\nObject class = \"TextGrid\"\n\n0\n0.25\n<exists>\n1\n";
        assert!(matches!(
            parse_textgrid(short),
            Err(InterchangeError::UnsupportedTextGrid(_))
        ));
        let bin = "File type = \"ooBinaryFile\"\n";
        assert!(matches!(parse_textgrid(bin), Err(InterchangeError::UnsupportedTextGrid(_))));
    }

    #[test]
    fn truncated_tier() {
        let text = MINIMAL.replace("intervals: size = 1", "intervals: size = 3");
        match parse_textgrid(&text) {
            Err(InterchangeError::TruncatedTier { declared, parsed, .. }) => {
                assert_eq!((declared, parsed), (3, 1));
            }
            other => panic!("expected TruncatedTier, got {other:?}"),
        }
    }

    #[test]
    fn non_monotone() {
        let text = MINIMAL.replace("xmax = 0.25\n            text", "xmax = 0.00\n            text");
        assert!(matches!(
            parse_textgrid(&text),
            Err(InterchangeError::NonMonotoneIntervals { .. })
        ));
        let overlapping = MFA_STYLE.replace("xmin = 0.2 \n            xmax = 0.4", "xmin = 0.1 \n            xmax = 0.4");
        assert!(matches!(
            parse_textgrid(&overlapping),
            Err(InterchangeError::NonMonotoneIntervals { index: 1, .. })
        ));
    }

    #[test]
    fn writer_round_trips() {
        let set = parse_textgrid(MFA_STYLE).unwrap();
        assert_eq!(parse_textgrid(&write_textgrid(&set)).unwrap(), set);
    }

    proptest! {
        #[test]
        fn arbitrary_text_never_panics(s in "\\PC{0,400}") {
            let _ = parse_textgrid(&s);
        }

        #[test]
        fn mutated_fixture_never_panics(cut in 0usize..800, junk in "[ -~\n]{0,12}", at in 0usize..800) {
            let base = MFA_STYLE;
            let mut chars: Vec<char> = base.chars().collect();
            let cut = cut.min(chars.len());
            chars.truncate(cut.max(at.min(chars.len())));
            let at = at.min(chars.len());
            let mut s: String = chars[..at].iter().collect();
            s.push_str(&junk);
            s.extend(chars[at..].iter());
            let _ = parse_textgrid(&s);
        }
    }
}
