//! Report files under the output directory:
//!
//! * `<dataset>/<method>.csv`, one row per run × outer fold,
//! * `<dataset>/<method>.error` for pairs that failed,
//! * `summary.md`, mean ± std tables with the best method per dataset in bold,
//! * `friedman.md`, mean ranks and the Friedman statistic.
//!
//! Summaries are rebuilt from the CSV files alone, so `report` can be rerun
//! on an existing directory.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use statrs::distribution::{ChiSquared, ContinuousCDF};
use twinsvm_core::cv::{EvalReport, MeanStd};
use twinsvm_core::friedman::friedman_test;
use twinsvm_core::metrics::{metrics, ConfusionMatrix};
use twinsvm_core::{Kernel, Matrix};

use crate::error::{read_to_string, BenchError, ParseError, Result};

pub const CSV_HEADER: [&str; 24] = [
    "run", "fold", "tp", "fn", "tn", "fp", "accuracy", "sensitivity", "specificity", "gmean", "auc", "c1", "c2",
    "c3", "c4", "theta1", "theta2", "eta1", "eta2", "k_graph", "gamma", "converged", "degenerate",
    "sampler_relaxed",
];

pub fn fold_csv(report: &EvalReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).unwrap();
    for f in &report.folds {
        let hp = &f.hyperparams;
        let gamma = match hp.kernel {
            Kernel::Linear => String::new(),
            Kernel::Rbf { gamma } => gamma.to_string(),
        };
        let cm = &f.confusion;
        let r = &f.rates;
        let row: [String; 24] = [
            f.run.to_string(),
            f.fold.to_string(),
            cm.tp.to_string(),
            cm.fn_.to_string(),
            cm.tn.to_string(),
            cm.fp.to_string(),
            r.accuracy.to_string(),
            r.sensitivity.to_string(),
            r.specificity.to_string(),
            r.gmean.to_string(),
            f.auc.to_string(),
            hp.c1.to_string(),
            hp.c2.to_string(),
            hp.c3.to_string(),
            hp.c4.to_string(),
            hp.theta1.to_string(),
            hp.theta2.to_string(),
            hp.eta1.to_string(),
            hp.eta2.to_string(),
            hp.k_graph.to_string(),
            gamma,
            f.info.converged.to_string(),
            f.info.degenerate.to_string(),
            f.info.sampler_relaxed.to_string(),
        ];
        w.write_record(&row).unwrap();
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

/// The parts of a fold row that the summaries need.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoldRow {
    pub confusion: ConfusionMatrix,
    pub auc: f64,
}

pub fn read_fold_csv(path: &Path) -> Result<Vec<FoldRow>> {
    let mut reader = csv::Reader::from_path(path).map_err(|source| BenchError::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|source| BenchError::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        let line = i + 2;
        let bad = |col: &str| BenchError::parse(path, ParseError::new(line, format!("bad `{col}` field")));
        let count = |j: usize| record.get(j).and_then(|v| v.parse::<usize>().ok()).ok_or_else(|| bad(CSV_HEADER[j]));
        rows.push(FoldRow {
            confusion: ConfusionMatrix {
                tp: count(2)?,
                fn_: count(3)?,
                tn: count(4)?,
                fp: count(5)?,
            },
            auc: record.get(10).and_then(|v| v.parse().ok()).ok_or_else(|| bad("auc"))?,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Metric {
    Accuracy,
    Gmean,
    Auc,
    Sensitivity,
    Specificity,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::Accuracy,
        Metric::Gmean,
        Metric::Auc,
        Metric::Sensitivity,
        Metric::Specificity,
    ];

    pub fn title(self) -> &'static str {
        match self {
            Metric::Accuracy => "Accuracy (%)",
            Metric::Gmean => "G-mean (%)",
            Metric::Auc => "AUC (%)",
            Metric::Sensitivity => "Sensitivity (%)",
            Metric::Specificity => "Specificity (%)",
        }
    }

    fn of(self, row: &FoldRow) -> f64 {
        let r = metrics(&row.confusion);
        match self {
            Metric::Accuracy => r.accuracy,
            Metric::Gmean => r.gmean,
            Metric::Auc => row.auc,
            Metric::Sensitivity => r.sensitivity,
            Metric::Specificity => r.specificity,
        }
    }
}

/// Everything found in an output directory.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Collected {
    /// `(dataset, method)` → per-metric mean ± std over folds × runs.
    pub cells: BTreeMap<(String, String), BTreeMap<Metric, MeanStd>>,
    pub errors: Vec<(String, String, String)>,
}

impl Collected {
    pub fn datasets(&self) -> BTreeSet<&str> {
        self.cells
            .keys()
            .map(|k| k.0.as_str())
            .chain(self.errors.iter().map(|e| e.0.as_str()))
            .collect()
    }

    pub fn methods(&self) -> BTreeSet<&str> {
        self.cells
            .keys()
            .map(|k| k.1.as_str())
            .chain(self.errors.iter().map(|e| e.1.as_str()))
            .collect()
    }

    fn get(&self, dataset: &str, method: &str, metric: Metric) -> Option<MeanStd> {
        self.cells
            .get(&(dataset.to_string(), method.to_string()))
            .and_then(|m| m.get(&metric))
            .copied()
    }
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| BenchError::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|err| BenchError::io(dir, err)))
        .collect::<Result<_>>()?;
    out.sort();
    Ok(out)
}

pub fn collect(out_dir: &Path) -> Result<Collected> {
    let mut c = Collected::default();
    for sub in sorted_entries(out_dir)?.into_iter().filter(|p| p.is_dir()) {
        let dataset = sub.file_name().unwrap().to_string_lossy().into_owned();
        for file in sorted_entries(&sub)? {
            let method = file.file_stem().unwrap_or_default().to_string_lossy().into_owned();
            match file.extension().and_then(|e| e.to_str()) {
                Some("csv") => {
                    let rows = read_fold_csv(&file)?;
                    let cells = Metric::ALL
                        .into_iter()
                        .map(|m| (m, MeanStd::of(&rows.iter().map(|r| m.of(r)).collect::<Vec<_>>())))
                        .collect();
                    c.cells.insert((dataset.clone(), method), cells);
                }
                Some("error") => {
                    let msg = read_to_string(&file)?.trim().to_string();
                    c.errors.push((dataset.clone(), method, msg));
                }
                _ => {}
            }
        }
    }
    Ok(c)
}

fn pct(v: MeanStd) -> String {
    format!("{:.2} ± {:.2}", 100.0 * v.mean, 100.0 * v.std)
}

pub fn summary_markdown(c: &Collected) -> String {
    let datasets = c.datasets();
    let methods: Vec<&str> = c.methods().into_iter().collect();
    let mut out = String::from("# Summary\n\nMean ± standard deviation over all runs and outer folds.\n");
    for metric in Metric::ALL {
        write!(out, "\n## {}\n\n| Dataset |", metric.title()).unwrap();
        for m in &methods {
            write!(out, " {m} |").unwrap();
        }
        out.push_str("\n|---|");
        out.push_str(&"---|".repeat(methods.len()));
        out.push('\n');
        for d in &datasets {
            let values: Vec<Option<MeanStd>> = methods.iter().map(|m| c.get(d, m, metric)).collect();
            let best = values.iter().flatten().map(|v| v.mean).fold(f64::NEG_INFINITY, f64::max);
            write!(out, "| {d} |").unwrap();
            for v in values {
                match v {
                    Some(v) if v.mean == best => write!(out, " **{}** |", pct(v)).unwrap(),
                    Some(v) => write!(out, " {} |", pct(v)).unwrap(),
                    None => out.push_str(" n/a |"),
                }
            }
            out.push('\n');
        }
    }
    if !c.errors.is_empty() {
        out.push_str("\n## Errors\n\n");
        for (d, m, e) in &c.errors {
            writeln!(out, "- {d} / {m}: {e}").unwrap();
        }
    }
    out
}

pub fn friedman_markdown(c: &Collected) -> String {
    let methods: Vec<&str> = c.methods().into_iter().collect();
    let mut out = String::from("# Friedman test\n\nRank k is best; tied methods share the average rank.\n");
    for metric in [Metric::Accuracy, Metric::Gmean, Metric::Auc] {
        write!(out, "\n## {}\n\n", metric.title()).unwrap();
        let complete: Vec<&str> = c
            .datasets()
            .into_iter()
            .filter(|d| methods.iter().all(|m| c.get(d, m, metric).is_some_and(|v| v.mean.is_finite())))
            .collect();
        let values: Vec<f64> = complete
            .iter()
            .flat_map(|d| methods.iter().map(|m| c.get(d, m, metric).unwrap().mean))
            .collect();
        let table = Matrix::from_vec(complete.len(), methods.len(), values);
        match friedman_test(&table) {
            Ok(f) => {
                out.push_str("| Method | Mean rank |\n|---|---|\n");
                for (m, r) in methods.iter().zip(&f.mean_ranks) {
                    writeln!(out, "| {m} | {r:.4} |").unwrap();
                }
                let df = (f.n_methods - 1) as f64;
                let p = ChiSquared::new(df).map_or(f64::NAN, |d| d.sf(f.chi_square));
                writeln!(
                    out,
                    "\nDatasets: {}. Methods: {}. Chi-square: {:.4} (df {}), p-value: {:.4}.",
                    f.n_datasets, f.n_methods, f.chi_square, f.n_methods - 1, p
                )
                .unwrap();
            }
            Err(e) => {
                writeln!(
                    out,
                    "Not computed: {e} ({} complete datasets, {} methods).",
                    complete.len(),
                    methods.len()
                )
                .unwrap();
            }
        }
    }
    out
}

/// Rewrites `summary.md` and `friedman.md` from the CSV files in `out_dir`.
pub fn write_summaries(out_dir: &Path) -> Result<Collected> {
    let c = collect(out_dir)?;
    for (name, text) in [("summary.md", summary_markdown(&c)), ("friedman.md", friedman_markdown(&c))] {
        let path = out_dir.join(name);
        std::fs::write(&path, text).map_err(|e| BenchError::io(path, e))?;
    }
    Ok(c)
}
