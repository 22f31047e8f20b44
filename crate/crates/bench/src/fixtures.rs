//! Checks shipped datasets against the manifest of expected shapes.
//!
//! Manifest lines are `name rows features minority ir`; `#` starts a
//! comment. Each dataset lives next to the manifest as `<name>.csv` with
//! `<name>.schema`.

use std::fmt::Write as _;
use std::path::Path;

use twinsvm_core::Label;

use crate::dataset::{load_csv, Schema};
use crate::error::{read_to_string, BenchError, ParseError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub name: String,
    pub rows: usize,
    pub features: usize,
    pub minority: usize,
    pub imbalance_ratio: f64,
}

pub fn parse_manifest(text: &str) -> Result<Vec<ManifestEntry>, ParseError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |m: &str| ParseError::new(i + 1, m);
        let f: Vec<&str> = line.split_whitespace().collect();
        let [name, rows, features, minority, ir] = f.as_slice() else {
            return Err(err("expected `name rows features minority ir`"));
        };
        out.push(ManifestEntry {
            name: name.to_string(),
            rows: rows.parse().map_err(|_| err("bad row count"))?,
            features: features.parse().map_err(|_| err("bad feature count"))?,
            minority: minority.parse().map_err(|_| err("bad minority count"))?,
            imbalance_ratio: ir.parse().map_err(|_| err("bad imbalance ratio"))?,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixtureCheck {
    pub expected: ManifestEntry,
    /// `(rows, features, minority)` as found, or why loading failed.
    pub found: Result<(usize, usize, usize), String>,
}

impl FixtureCheck {
    pub fn passed(&self) -> bool {
        let e = &self.expected;
        self.found == Ok((e.rows, e.features, e.minority))
    }
}

pub fn validate_fixtures(dir: &Path) -> Result<Vec<FixtureCheck>> {
    let manifest_path = dir.join("manifest.txt");
    let manifest = parse_manifest(&read_to_string(&manifest_path)?).map_err(|e| BenchError::parse(&manifest_path, e))?;
    Ok(manifest
        .into_iter()
        .map(|expected| {
            let csv = dir.join(format!("{}.csv", expected.name));
            let schema = dir.join(format!("{}.schema", expected.name));
            let found = Schema::load(&schema)
                .and_then(|s| load_csv(&csv, &s))
                .map(|ds| (ds.len(), ds.dim(), ds.count(Label::Minority)))
                .map_err(|e| e.to_string());
            FixtureCheck { expected, found }
        })
        .collect())
}

pub fn render_checks(checks: &[FixtureCheck]) -> String {
    let mut out = format!(
        "{:<14} {:>14} {:>14} {:>14}  {}\n",
        "dataset", "rows", "features", "minority", "status"
    );
    for c in checks {
        let e = &c.expected;
        let (rows, feats, minority, status) = match &c.found {
            Ok((r, f, m)) => {
                let cell = |found: usize, want: usize| {
                    if found == want {
                        found.to_string()
                    } else {
                        format!("{found} (want {want})")
                    }
                };
                let status = if c.passed() { "pass".to_string() } else { "FAIL".to_string() };
                (cell(*r, e.rows), cell(*f, e.features), cell(*m, e.minority), status)
            }
            Err(msg) => ("-".into(), "-".into(), "-".into(), format!("FAIL: {msg}")),
        };
        writeln!(out, "{:<14} {rows:>14} {feats:>14} {minority:>14}  {status}", e.name).unwrap();
    }
    out
}
