//! Runs nested cross-validation for every (dataset, method) pair of a
//! config on a bounded worker pool and writes the report files.
//!
//! Work is split at the level of outer folds so that a single slow pair
//! still uses every worker. Results are regrouped in `(run, fold)` order,
//! which keeps the output independent of scheduling.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use twinsvm_core::cv::{outer_splits, run_outer_split, EvalReport, FoldResult, OuterSplit};
use twinsvm_core::{Dataset, Hyperparams};

use crate::config::ExperimentConfig;
use crate::dataset::{load_csv, Schema};
use crate::error::{BenchError, Result};
use crate::report::{fold_csv, write_summaries};

#[derive(Debug, Clone, PartialEq)]
pub enum PairStatus {
    Done(EvalReport),
    /// The pair never started (unreadable dataset, too few rows for the folds).
    Unrunnable(String),
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairOutcome {
    pub dataset: String,
    pub method: String,
    pub status: PairStatus,
    /// Summed time spent in this pair's folds, in seconds.
    pub cpu_seconds: f64,
}

pub fn load_dataset(name: &str, csv: &Path, schema: &Path) -> Result<Dataset> {
    let schema = Schema::load(schema)?;
    let ds = load_csv(csv, &schema)?;
    Ok(Dataset::new(name, ds.features().clone(), ds.labels().to_vec())?)
}

struct Prepared<'a> {
    dataset: &'a Dataset,
    lattice: Vec<Hyperparams>,
    splits: Vec<OuterSplit>,
}

/// Runs every pair and returns outcomes in config order (datasets outer,
/// methods inner). Nothing is written.
pub fn run_pairs(cfg: &ExperimentConfig) -> Result<Vec<PairOutcome>> {
    let datasets: Vec<Result<Dataset, String>> = cfg
        .datasets
        .iter()
        .map(|d| load_dataset(&d.name, &d.csv, &d.schema).map_err(|e| e.to_string()))
        .collect();

    let mut outcomes = Vec::new();
    let mut prepared: Vec<Option<Prepared>> = Vec::new();
    for (entry, ds) in cfg.datasets.iter().zip(&datasets) {
        for method in &cfg.methods {
            let prep = ds
                .as_ref()
                .map_err(Clone::clone)
                .and_then(|ds| {
                    let splits = outer_splits(ds, &cfg.cv).map_err(|e| e.to_string())?;
                    Ok(Prepared {
                        dataset: ds,
                        lattice: cfg.grid.lattice(method),
                        splits,
                    })
                });
            let status = match &prep {
                Ok(_) => PairStatus::Failed(String::new()),
                Err(e) => PairStatus::Unrunnable(e.clone()),
            };
            outcomes.push(PairOutcome {
                dataset: entry.name.clone(),
                method: method.name(),
                status,
                cpu_seconds: 0.0,
            });
            prepared.push(prep.ok());
        }
    }

    let tasks: Vec<(usize, usize)> = prepared
        .iter()
        .enumerate()
        .filter_map(|(i, p)| p.as_ref().map(|p| (i, p.splits.len())))
        .flat_map(|(i, n)| (0..n).map(move |s| (i, s)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.unwrap_or(0))
        .build()
        .map_err(|e| BenchError::io("<worker pool>", std::io::Error::other(e)))?;
    let n_methods = cfg.methods.len();
    let results: Vec<(twinsvm_core::Result<FoldResult>, f64)> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(pair, split)| {
                let p = prepared[pair].as_ref().expect("task for a prepared pair");
                let method = &cfg.methods[pair % n_methods];
                let start = Instant::now();
                let r = run_outer_split(p.dataset, method, &p.lattice, &cfg.cv, &p.splits[split]);
                (r, start.elapsed().as_secs_f64())
            })
            .collect()
    });

    let mut per_pair: Vec<Vec<FoldResult>> = vec![Vec::new(); outcomes.len()];
    let mut first_error: Vec<Option<String>> = vec![None; outcomes.len()];
    for (&(pair, split), (r, secs)) in tasks.iter().zip(results) {
        outcomes[pair].cpu_seconds += secs;
        match r {
            Ok(f) => per_pair[pair].push(f),
            Err(e) => {
                let s = &prepared[pair].as_ref().unwrap().splits[split];
                first_error[pair].get_or_insert_with(|| format!("run {} fold {}: {e}", s.run, s.fold));
            }
        }
    }
    for (i, o) in outcomes.iter_mut().enumerate() {
        if matches!(o.status, PairStatus::Unrunnable(_)) {
            continue;
        }
        o.status = match first_error[i].take() {
            Some(e) => PairStatus::Failed(e),
            None => {
                let mut report = EvalReport::from_folds(&o.dataset, &o.method, std::mem::take(&mut per_pair[i]));
                report.wall_time = Some(o.cpu_seconds);
                PairStatus::Done(report)
            }
        };
        log::info!("{} / {}: {:.1}s of fold time", o.dataset, o.method, o.cpu_seconds);
    }
    Ok(outcomes)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| BenchError::io(path, e))
}

fn remove_if_present(path: &Path) -> Result<()> {
    match std::fs::remove_file(path) {
        Err(e) if e.kind() != std::io::ErrorKind::NotFound => Err(BenchError::io(path, e)),
        _ => Ok(()),
    }
}

/// Writes per-pair files and regenerates the summaries.
pub fn write_outcomes(out_dir: &Path, outcomes: &[PairOutcome]) -> Result<()> {
    for o in outcomes {
        let dir = out_dir.join(&o.dataset);
        std::fs::create_dir_all(&dir).map_err(|e| BenchError::io(&dir, e))?;
        let csv = dir.join(format!("{}.csv", o.method));
        let err = dir.join(format!("{}.error", o.method));
        match &o.status {
            PairStatus::Done(report) => {
                write_file(&csv, &fold_csv(report))?;
                remove_if_present(&err)?;
            }
            PairStatus::Unrunnable(e) | PairStatus::Failed(e) => {
                write_file(&err, &format!("{e}\n"))?;
                remove_if_present(&csv)?;
            }
        }
    }
    write_summaries(out_dir)?;
    Ok(())
}

/// Exit status for a finished run: 0 when every pair succeeded, 1 when no
/// pair could start, 2 otherwise.
pub fn exit_code(outcomes: &[PairOutcome]) -> i32 {
    if outcomes.iter().all(|o| matches!(o.status, PairStatus::Done(_))) {
        0
    } else if outcomes.iter().all(|o| matches!(o.status, PairStatus::Unrunnable(_))) {
        1
    } else {
        2
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<Vec<PairOutcome>> {
    let outcomes = run_pairs(cfg)?;
    if outcomes.iter().all(|o| matches!(o.status, PairStatus::Unrunnable(_))) {
        return Ok(outcomes);
    }
    std::fs::create_dir_all(&cfg.output).map_err(|e| BenchError::io(&cfg.output, e))?;
    write_outcomes(&cfg.output, &outcomes)?;
    Ok(outcomes)
}
