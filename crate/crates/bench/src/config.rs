//! Experiment configuration.
//!
//! ```text
//! seed = 7
//! output = out
//! methods = wsocp-twsvm-linear, socp-twsvm-linear, smote+twsvm-linear
//!
//! [dataset haberman]
//! csv = fixtures/haberman.csv
//!
//! [grid]
//! k = 3, 5
//! ```
//!
//! Relative paths are resolved against the directory of the config file.

use std::path::{Path, PathBuf};

use twinsvm_core::classifiers::Sampler;
use twinsvm_core::cv::{CvConfig, Grid, MethodSpec, Objective, Preprocess};
use twinsvm_core::weighting::WeightMode;
use twinsvm_core::ModelKind;

use crate::dataset::default_schema_path;
use crate::error::{read_to_string, BenchError, ParseError, Result};
use crate::kv::{self, Entry};
use crate::model_io::kind_from_name;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetEntry {
    pub name: String,
    pub csv: PathBuf,
    pub schema: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub datasets: Vec<DatasetEntry>,
    pub methods: Vec<MethodSpec>,
    pub grid: Grid,
    pub cv: CvConfig,
    pub output: PathBuf,
    /// Worker threads; `None` uses every logical core.
    pub jobs: Option<usize>,
}

/// Parses names such as `wsocp-twsvm-rbf` or `smote+twsvm-linear`.
pub fn parse_method(name: &str, smote_k: usize) -> Option<MethodSpec> {
    let (prefix, rest) = match name.split_once('+') {
        Some((p, r)) => (Some(p), r),
        None => (None, name),
    };
    let (family, kernel) = rest.rsplit_once('-')?;
    let kernelized = match kernel {
        "linear" => false,
        "rbf" => true,
        _ => return None,
    };
    let kind = kind_from_name(family)?;
    let preprocess = match prefix {
        None | Some("none") => Preprocess::None,
        Some("random-under") => Preprocess::RandomUnder,
        Some("random-over") => Preprocess::RandomOver,
        Some("smote") => Preprocess::Smote { k: smote_k },
        Some(_) => return None,
    };
    if kind == ModelKind::Wsocp && preprocess != Preprocess::None {
        return None;
    }
    Some(MethodSpec {
        preprocess,
        ..MethodSpec::new(kind, kernelized)
    })
}

/// Command-line overrides applied after parsing.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub literal_weights: bool,
    pub objective: Option<Objective>,
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn parse(text: &str, base_dir: &Path) -> Result<ExperimentConfig, ParseError> {
        let sections = kv::parse(text)?;
        let mut seed = None;
        let mut cv = CvConfig::default();
        let mut output = base_dir.join("out");
        let mut jobs = None;
        let mut method_entry: Option<&Entry> = None;
        let mut literal = false;
        let mut sampler = Sampler::Guarded {
            min_kept_fraction: 0.1,
        };
        let mut smote_k = 5;

        for e in &sections[0].entries {
            match e.key.as_str() {
                "seed" => seed = Some(kv::parse_num(e)?),
                "output" => output = base_dir.join(&e.value),
                "jobs" => jobs = Some(kv::parse_num::<usize>(e)?).filter(|&j| j > 0),
                "objective" => cv.objective = e.value.parse().map_err(|m: String| ParseError::new(e.line, m))?,
                "outer_folds" => cv.outer_k = kv::parse_num(e)?,
                "runs" => cv.runs = kv::parse_num(e)?,
                "inner_folds" => cv.inner_k = kv::parse_num(e)?,
                "literal_weights" => literal = kv::parse_bool(e)?,
                "smote_k" => smote_k = kv::parse_num(e)?,
                "methods" => method_entry = Some(e),
                "sampler" => {
                    sampler = match e.value.as_str() {
                        "graph" => Sampler::Guarded {
                            min_kept_fraction: 0.1,
                        },
                        "graph-strict" => Sampler::Graph,
                        "none" => Sampler::Off,
                        v => {
                            return Err(ParseError::new(
                                e.line,
                                format!("sampler must be graph, graph-strict or none, found `{v}`"),
                            ))
                        }
                    }
                }
                other => return Err(ParseError::new(e.line, format!("unknown key `{other}`"))),
            }
        }
        let last = text.lines().count().max(1);
        cv.seed = seed.ok_or_else(|| ParseError::new(last, "missing mandatory `seed`"))?;
        for (name, v) in [("outer_folds", cv.outer_k), ("inner_folds", cv.inner_k), ("runs", cv.runs)] {
            if v < 1 || (name != "runs" && v < 2) {
                return Err(ParseError::new(last, format!("`{name}` is too small: {v}")));
            }
        }

        let me = method_entry.ok_or_else(|| ParseError::new(last, "missing `methods`"))?;
        let mut methods = Vec::new();
        for name in me.value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let mut m = parse_method(name, smote_k).ok_or_else(|| ParseError::new(me.line, format!("unknown method `{name}`")))?;
            m.wsocp.sampler = sampler;
            if literal {
                m.wsocp.weight_mode = WeightMode::Literal;
            }
            if !methods.contains(&m) {
                methods.push(m);
            }
        }
        if methods.is_empty() {
            return Err(ParseError::new(me.line, "no methods listed"));
        }

        let mut datasets = Vec::new();
        let mut grid = Grid::default();
        for s in &sections[1..] {
            match (s.name.as_str(), &s.arg) {
                ("dataset", Some(name)) => {
                    let (mut csv, mut schema) = (None, None);
                    for e in &s.entries {
                        match e.key.as_str() {
                            "csv" => csv = Some(base_dir.join(&e.value)),
                            "schema" => schema = Some(base_dir.join(&e.value)),
                            other => return Err(ParseError::new(e.line, format!("unknown dataset key `{other}`"))),
                        }
                    }
                    let csv = csv.ok_or_else(|| ParseError::new(s.line, format!("dataset `{name}` has no `csv`")))?;
                    if datasets.iter().any(|d: &DatasetEntry| &d.name == name) {
                        return Err(ParseError::new(s.line, format!("dataset `{name}` listed twice")));
                    }
                    datasets.push(DatasetEntry {
                        name: name.clone(),
                        schema: schema.unwrap_or_else(|| default_schema_path(&csv)),
                        csv,
                    });
                }
                ("dataset", None) => return Err(ParseError::new(s.line, "`[dataset]` needs a name")),
                ("grid", None) => parse_grid(&s.entries, &mut grid)?,
                (other, _) => return Err(ParseError::new(s.line, format!("unknown section `{other}`"))),
            }
        }
        if datasets.is_empty() {
            return Err(ParseError::new(last, "no `[dataset <name>]` sections"));
        }
        Ok(ExperimentConfig {
            datasets,
            methods,
            grid,
            cv,
            output,
            jobs,
        })
    }

    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let base = path.parent().unwrap_or(Path::new("."));
        ExperimentConfig::parse(&read_to_string(path)?, base).map_err(|e| BenchError::parse(path, e))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.cv.seed = seed;
        }
        if let Some(jobs) = o.jobs {
            self.jobs = Some(jobs).filter(|&j| j > 0);
        }
        if let Some(objective) = o.objective {
            self.cv.objective = objective;
        }
        if let Some(out) = &o.output {
            self.output = out.clone();
        }
        if o.literal_weights {
            for m in &mut self.methods {
                m.wsocp.weight_mode = WeightMode::Literal;
            }
        }
    }
}

fn parse_grid(entries: &[Entry], grid: &mut Grid) -> Result<(), ParseError> {
    for e in entries {
        let positive = |v: Vec<f64>| {
            if v.iter().all(|x| *x > 0.0 && x.is_finite()) {
                Ok(v)
            } else {
                Err(ParseError::new(e.line, format!("`{}` values must be positive", e.key)))
            }
        };
        match e.key.as_str() {
            "c" => grid.c = positive(kv::parse_list(e)?)?,
            "c_slack" => grid.c_slack = positive(kv::parse_list(e)?)?,
            "theta" => grid.theta = positive(kv::parse_list(e)?)?,
            "gamma" => grid.gamma = positive(kv::parse_list(e)?)?,
            "eta1" | "eta2" => {
                let v: Vec<f64> = kv::parse_list(e)?;
                if v.iter().any(|x| !(*x > 0.0 && *x < 1.0)) {
                    return Err(ParseError::new(e.line, format!("`{}` values must lie in (0, 1)", e.key)));
                }
                if e.key == "eta1" {
                    grid.eta1 = v;
                } else {
                    grid.eta2 = v;
                }
            }
            "k" => {
                let v: Vec<usize> = kv::parse_list(e)?;
                if v.contains(&0) {
                    return Err(ParseError::new(e.line, "`k` values must be at least 1"));
                }
                grid.k_graph = v;
            }
            other => return Err(ParseError::new(e.line, format!("unknown grid key `{other}`"))),
        }
    }
    Ok(())
}
