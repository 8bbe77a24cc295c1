use serde::Serialize;
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::environment::EnvironmentRecord;
use crate::error::Result;
use crate::partition::ENGINE_VERSION;
use crate::renewal::LawRecord;

use super::config::VerificationConfig;

/// Enough to regenerate every number in a report bit-exactly.
#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    pub engine: &'static str,
    pub law: LawRecord,
    pub environments: Vec<EnvironmentRecord>,
    pub config: VerificationConfig,
}

impl Provenance {
    pub fn new(config: &VerificationConfig, law: LawRecord, environments: Vec<EnvironmentRecord>) -> Self {
        Self {
            engine: ENGINE_VERSION,
            law,
            environments,
            config: config.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// A subcommand's output: JSON-lines records and one CSV table.
///
/// JSON lines, in order: one `header`, the suite's own records (each with a
/// `record` field naming its kind), one `check` per assertion, any `note`s,
/// and a final `verdict`. Non-finite numbers (zero weights in log form) are
/// written as `null`.
#[derive(Clone, Debug)]
pub struct Report {
    pub suite: String,
    pub provenance: Provenance,
    pub records: Vec<Value>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    /// extra files written next to the report, `(suffix, contents)`
    pub attachments: Vec<(String, Vec<u8>)>,
}

impl Report {
    pub fn new(suite: &str, provenance: Provenance, columns: &[&str]) -> Self {
        Self {
            suite: suite.to_string(),
            provenance,
            records: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            checks: Vec::new(),
            notes: Vec::new(),
            attachments: Vec::new(),
        }
    }

    pub fn record(&mut self, kind: &str, mut body: Value) {
        if let Value::Object(map) = &mut body {
            map.insert("record".into(), Value::String(kind.into()));
        }
        self.records.push(body);
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) -> bool {
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        });
        passed
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check_named(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        let header = json!({ "record": "header", "suite": self.suite, "provenance": self.provenance });
        writeln!(out, "{}", serde_json::to_string(&header)?).expect("string write");
        for r in &self.records {
            writeln!(out, "{}", serde_json::to_string(r)?).expect("string write");
        }
        for c in &self.checks {
            let line = json!({ "record": "check", "name": c.name, "passed": c.passed, "detail": c.detail });
            writeln!(out, "{}", serde_json::to_string(&line)?).expect("string write");
        }
        for n in &self.notes {
            writeln!(out, "{}", json!({ "record": "note", "text": n })).expect("string write");
        }
        let verdict = json!({ "record": "verdict", "suite": self.suite, "passed": self.passed() });
        writeln!(out, "{verdict}").expect("string write");
        Ok(out)
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Writes `<base>.jsonl`, `<base>.csv` and any attachments
    /// `<base><suffix>`; returns the paths written.
    pub fn write(&self, base: &Path) -> Result<Vec<PathBuf>> {
        if let Some(dir) = base.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let with = |suffix: &str| {
            let mut s = base.as_os_str().to_owned();
            s.push(suffix);
            PathBuf::from(s)
        };
        let mut written = Vec::new();
        let jsonl = with(".jsonl");
        std::fs::write(&jsonl, self.to_jsonl()?)?;
        written.push(jsonl);
        let csv = with(".csv");
        std::fs::write(&csv, self.to_csv())?;
        written.push(csv);
        for (suffix, bytes) in &self.attachments {
            let p = with(suffix);
            std::fs::write(&p, bytes)?;
            written.push(p);
        }
        Ok(written)
    }
}

/// Shortest round-trip text for a float; `-inf` for zero weights in log form.
pub fn num(x: f64) -> String {
    format!("{x}")
}

/// Empty cell for missing values.
pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}
