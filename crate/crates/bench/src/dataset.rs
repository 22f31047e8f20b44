//! CSV datasets described by a small schema file.
//!
//! ```text
//! label_column = status      # header name, 0-based index, or `last`
//! minority_value = Died
//! has_header = true          # optional; detected from the first row if absent
//! ```

use std::path::{Path, PathBuf};

use twinsvm_core::{Dataset, Label, Matrix};

use crate::error::{read_to_string, BenchError, ParseError, Result};
use crate::kv;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Name(String),
    Index(usize),
    Last,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    pub label_column: LabelColumn,
    pub minority_value: String,
    pub has_header: Option<bool>,
}

impl Schema {
    pub fn parse(text: &str) -> Result<Schema, ParseError> {
        let sections = kv::parse(text)?;
        if let Some(s) = sections.get(1) {
            return Err(ParseError::new(s.line, "schema files have no sections"));
        }
        let (mut label, mut minority, mut header) = (None, None, None);
        for e in &sections[0].entries {
            match e.key.as_str() {
                "label_column" => {
                    label = Some(match e.value.as_str() {
                        "last" => LabelColumn::Last,
                        v => v
                            .parse()
                            .map(LabelColumn::Index)
                            .unwrap_or_else(|_| LabelColumn::Name(v.to_string())),
                    })
                }
                "minority_value" => minority = Some(e.value.clone()),
                "has_header" => header = Some(kv::parse_bool(e)?),
                other => return Err(ParseError::new(e.line, format!("unknown schema key `{other}`"))),
            }
        }
        let last = text.lines().count().max(1);
        Ok(Schema {
            label_column: label.ok_or_else(|| ParseError::new(last, "missing `label_column`"))?,
            minority_value: minority.ok_or_else(|| ParseError::new(last, "missing `minority_value`"))?,
            has_header: header,
        })
    }

    pub fn load(path: &Path) -> Result<Schema> {
        Schema::parse(&read_to_string(path)?).map_err(|e| BenchError::parse(path, e))
    }
}

/// `data.csv` → `data.schema`.
pub fn default_schema_path(csv: &Path) -> PathBuf {
    csv.with_extension("schema")
}

fn is_numeric(cell: &str) -> bool {
    cell.trim().parse::<f64>().is_ok()
}

/// Reads the file in row order. Rows whose label equals `minority_value`
/// become [`Label::Minority`], every other row [`Label::Majority`].
pub fn load_csv(path: &Path, schema: &Schema) -> Result<Dataset> {
    let csv_err = |source| BenchError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let file = std::fs::File::open(path).map_err(|e| BenchError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut records = reader.records();
    let parse_err = |line: u64, msg: String| BenchError::parse(path, ParseError::new(line as usize, msg));

    let Some(first) = records.next().transpose().map_err(csv_err)? else {
        return Err(parse_err(1, "empty file".into()));
    };
    let width = first.len();
    let header = schema
        .has_header
        .unwrap_or_else(|| !first.iter().next().is_some_and(is_numeric));
    let label_idx = match &schema.label_column {
        LabelColumn::Last => width - 1,
        LabelColumn::Index(i) if *i < width => *i,
        LabelColumn::Index(i) => return Err(parse_err(1, format!("label column {i} out of range (width {width})"))),
        LabelColumn::Name(name) if header => first
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| parse_err(1, format!("no column named `{name}`")))?,
        LabelColumn::Name(name) => return Err(parse_err(1, format!("label column `{name}` needs a header row"))),
    };

    let mut values = Vec::new();
    let mut labels = Vec::new();
    let data = (!header).then_some(Ok(first)).into_iter().chain(records);
    for record in data {
        let record = record.map_err(csv_err)?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != width {
            return Err(parse_err(line, format!("expected {width} fields, found {}", record.len())));
        }
        for (j, cell) in record.iter().enumerate() {
            if j == label_idx {
                continue;
            }
            let v: f64 = cell
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| parse_err(line, format!("column {}: cannot parse `{cell}` as a number", j + 1)))?;
            values.push(v);
        }
        labels.push(if record[label_idx] == schema.minority_value {
            Label::Minority
        } else {
            Label::Majority
        });
    }
    if labels.is_empty() {
        return Err(parse_err(1, "no data rows".into()));
    }
    let name = path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
    let ds = Dataset::new(name, Matrix::from_vec(labels.len(), width - 1, values), labels)?;
    ds.require_classes(1)?;
    Ok(ds)
}

/// Features only: every column is numeric, no label.
pub fn load_features(path: &Path) -> Result<Matrix> {
    let file = std::fs::File::open(path).map_err(|e| BenchError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|source| BenchError::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        let parsed: Option<Vec<f64>> = record.iter().map(|c| c.parse().ok()).collect();
        match parsed {
            Some(row) => rows.push(row),
            None if i == 0 => continue,
            None => {
                let line = record.position().map_or(0, |p| p.line()) as usize;
                return Err(BenchError::parse(path, ParseError::new(line, "non-numeric cell")));
            }
        }
    }
    Matrix::from_rows(&rows).map_err(Into::into)
}
