use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

/// A named grid of optional numbers. Missing cells serialize as `null` in
/// JSON and as empty cells in CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportTable {
    pub name: String,
    /// Header of the row-label column.
    pub row_label: String,
    pub columns: Vec<String>,
    pub rows: Vec<String>,
    pub cells: Vec<Vec<Option<f64>>>,
}

impl ReportTable {
    pub fn new<S: Into<String>>(name: &str, row_label: &str, columns: impl IntoIterator<Item = S>) -> Self {
        ReportTable {
            name: name.to_owned(),
            row_label: row_label.to_owned(),
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
            cells: Vec::new(),
        }
    }

    /// Appends a row; non-finite values are stored as missing.
    pub fn push(&mut self, label: impl Into<String>, values: impl IntoIterator<Item = Option<f64>>) {
        let row: Vec<Option<f64>> = values.into_iter().map(|v| v.filter(|x| x.is_finite())).collect();
        assert_eq!(row.len(), self.columns.len(), "row width must match columns of {}", self.name);
        self.rows.push(label.into());
        self.cells.push(row);
    }

    pub fn get(&self, row: &str, column: &str) -> Option<f64> {
        let r = self.rows.iter().position(|x| x == row)?;
        let c = self.columns.iter().position(|x| x == column)?;
        self.cells[r][c]
    }

    pub fn column(&self, column: &str) -> Vec<Option<f64>> {
        match self.columns.iter().position(|x| x == column) {
            Some(c) => self.cells.iter().map(|r| r[c]).collect(),
            None => Vec::new(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let header = std::iter::once(self.row_label.as_str()).chain(self.columns.iter().map(String::as_str));
        w.write_record(header).expect("in-memory write");
        for (label, row) in self.rows.iter().zip(&self.cells) {
            let mut rec = vec![label.clone()];
            rec.extend(row.iter().map(|v| v.map(|x| x.to_string()).unwrap_or_default()));
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }
}

/// Typed result of one analysis run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub analysis_id: String,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub tables: Vec<ReportTable>,
    pub findings: Vec<String>,
    pub seed: u64,
}

fn fmt_cell(v: Option<f64>) -> String {
    match v {
        None => "".into(),
        Some(x) if x == x.trunc() && x.abs() < 1e15 => format!("{x:.0}"),
        Some(x) if x != 0.0 && (x.abs() < 1e-3 || x.abs() >= 1e6) => format!("{x:.3e}"),
        Some(x) => format!("{x:.4}"),
    }
}

impl AnalysisReport {
    pub fn new(analysis_id: &str, seed: u64) -> Self {
        AnalysisReport {
            analysis_id: analysis_id.to_owned(),
            parameters: BTreeMap::new(),
            tables: Vec::new(),
            findings: Vec::new(),
            seed,
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("parameter serializes");
        self.parameters.insert(key.to_owned(), v);
    }

    pub fn table(&self, name: &str) -> Option<&ReportTable> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn finding(&mut self, text: impl Into<String>) {
        self.findings.push(text.into());
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {}\n", self.analysis_id);
        let _ = writeln!(out, "seed: {}\n", self.seed);
        if !self.parameters.is_empty() {
            out.push_str("## Parameters\n\n");
            for (k, v) in &self.parameters {
                let _ = writeln!(out, "- {k}: {v}");
            }
            out.push('\n');
        }
        for t in &self.tables {
            let _ = writeln!(out, "## {}\n", t.name);
            let _ = writeln!(out, "| {} | {} |", t.row_label, t.columns.join(" | "));
            let _ = writeln!(out, "|{}", "---|".repeat(t.columns.len() + 1));
            for (label, row) in t.rows.iter().zip(&t.cells) {
                let cells: Vec<String> = row.iter().map(|v| fmt_cell(*v)).collect();
                let _ = writeln!(out, "| {} | {} |", label, cells.join(" | "));
            }
            out.push('\n');
        }
        if !self.findings.is_empty() {
            out.push_str("## Findings\n\n");
            for f in &self.findings {
                let _ = writeln!(out, "- {f}");
            }
        }
        out
    }

    /// Writes `<id>.json`, `<id>.md` and one `<id>.<table>.csv` per table
    /// into `dir`, returning the paths written.
    pub fn write(&self, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let id = &self.analysis_id;
        let mut written = Vec::new();
        let mut put = |name: String, body: String| -> std::io::Result<()> {
            let p = dir.join(name);
            std::fs::write(&p, body)?;
            written.push(p);
            Ok(())
        };
        put(format!("{id}.json"), self.to_json())?;
        put(format!("{id}.md"), self.to_markdown())?;
        for t in &self.tables {
            put(format!("{id}.{}.csv", t.name), t.to_csv())?;
        }
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> AnalysisReport {
        let mut r = AnalysisReport::new("demo", 7);
        r.param("min_n", 10);
        let mut t = ReportTable::new("grid", "feature", ["a", "b"]);
        t.push("x", [Some(1.5), None]);
        t.push("y, z", [Some(f64::NAN), Some(-2.25e-7)]);
        r.tables.push(t);
        r.finding("something happened");
        r
    }

    #[test]
    fn json_round_trip_is_lossless() {
        let r = sample();
        let back = AnalysisReport::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.table("grid").unwrap().get("y, z", "a"), None);
    }

    #[test]
    fn csv_and_markdown() {
        let r = sample();
        let csv = r.tables[0].to_csv();
        assert_eq!(csv, "feature,a,b\nx,1.5,\n\"y, z\",,-0.000000225\n");
        let md = r.to_markdown();
        assert!(md.contains("| feature | a | b |"));
        assert!(md.contains("| x | 1.5000 |  |"));
        assert!(md.contains("- something happened"));
    }

    #[test]
    fn writes_triplet() {
        let dir = tempfile::tempdir().unwrap();
        let files = sample().write(dir.path()).unwrap();
        let names: Vec<String> =
            files.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
        assert_eq!(names, ["demo.json", "demo.md", "demo.grid.csv"]);
    }
}
