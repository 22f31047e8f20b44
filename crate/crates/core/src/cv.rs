//! Stratified folds, grid search and nested cross-validation.
//!
//! Every split is standardized with statistics of its own training part, and
//! all sampling happens after standardization and only on training rows.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::classifiers::{
    fit_socp, fit_wsocp_sampled, train_twsvm_kernel, train_twsvm_linear, undersample, ModelKind,
    Sampler, TrainInfo, TwinModel, WsocpOptions,
};
use crate::data::{Dataset, Hyperparams, Label, Standardizer};
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::linalg::Matrix;
use crate::metrics::{auc, metrics, ConfusionMatrix, Rates};
use crate::sampling::{random_oversample, random_undersample, smote, Undersampled};

/// SplitMix64 finalizer used to derive independent sub-seeds.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic sub-seed for a path of indices below `seed`.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix(seed), |acc, &p| mix(acc ^ mix(p)))
}

/// `(train, test)` index pairs. Test folds partition `0..ds.len()` and
/// each holds `⌊m/k⌋` or `⌈m/k⌉` rows of every class of size `m`.
pub fn stratified_kfold(ds: &Dataset, k: usize, seed: u64) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    if k < 2 {
        return Err(Error::InvalidParameter {
            name: "folds",
            value: k as f64,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold_of = vec![0usize; ds.len()];
    let mut offset = 0;
    for label in [Label::Minority, Label::Majority] {
        let mut idx = ds.indices_of(label);
        if idx.len() < k {
            return Err(Error::TooFewSamples {
                what: "rows per class for stratified folds",
                needed: k,
                found: idx.len(),
            });
        }
        idx.shuffle(&mut rng);
        for (pos, &i) in idx.iter().enumerate() {
            fold_of[i] = (offset + pos) % k;
        }
        // Start the next class where this one stopped so fold sizes even out.
        offset = (offset + idx.len()) % k;
    }
    Ok((0..k)
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) = (0..ds.len()).partition(|&i| fold_of[i] == f);
            (train, test)
        })
        .collect())
}

/// Resampling applied to the (standardized) training data of the
/// classical and SOCP baselines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Preprocess {
    #[default]
    None,
    RandomUnder,
    RandomOver,
    Smote { k: usize },
}

impl Preprocess {
    pub fn name(self) -> &'static str {
        match self {
            Preprocess::None => "none",
            Preprocess::RandomUnder => "random-under",
            Preprocess::RandomOver => "random-over",
            Preprocess::Smote { .. } => "smote",
        }
    }

    pub fn apply(self, ds: &Dataset, seed: u64) -> Result<Dataset> {
        match self {
            Preprocess::None => Ok(ds.clone()),
            Preprocess::RandomUnder => random_undersample(ds, seed),
            Preprocess::RandomOver => random_oversample(ds, seed),
            Preprocess::Smote { k } => smote(ds, k, seed),
        }
    }
}

/// A classifier family plus everything needed to train it from raw data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodSpec {
    pub kind: ModelKind,
    pub kernelized: bool,
    pub preprocess: Preprocess,
    pub wsocp: WsocpOptions,
}

impl MethodSpec {
    pub fn new(kind: ModelKind, kernelized: bool) -> MethodSpec {
        MethodSpec {
            kind,
            kernelized,
            preprocess: Preprocess::None,
            wsocp: WsocpOptions {
                sampler: Sampler::Guarded {
                    min_kept_fraction: 0.1,
                },
                ..WsocpOptions::default()
            },
        }
    }

    /// Stable identifier such as `wsocp-twsvm-linear` or `smote+twsvm-rbf`.
    pub fn name(&self) -> String {
        let family = if self.kernelized { "rbf" } else { "linear" };
        match self.preprocess {
            Preprocess::None => format!("{}-{}", self.kind.name(), family),
            p => format!("{}+{}-{}", p.name(), self.kind.name(), family),
        }
    }
}

/// Candidate values for grid search. `c` sets `c1 = c2`, `c_slack` sets
/// `c3 = c4`, `theta` sets `θ1 = θ2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub c: Vec<f64>,
    pub c_slack: Vec<f64>,
    pub theta: Vec<f64>,
    pub eta1: Vec<f64>,
    pub eta2: Vec<f64>,
    pub k_graph: Vec<usize>,
    pub gamma: Vec<f64>,
    pub base: Hyperparams,
}

impl Default for Grid {
    fn default() -> Self {
        let penalty = vec![1e-9, 1e-8, 1e-7, 1e-6];
        let eta = vec![0.2, 0.4, 0.6, 0.8];
        Grid {
            c: penalty.clone(),
            c_slack: penalty.clone(),
            theta: penalty,
            eta1: eta.clone(),
            eta2: eta,
            k_graph: vec![3, 5, 10, 15],
            gamma: vec![0.25, 1.0, 4.0],
            base: Hyperparams::default(),
        }
    }
}

impl Grid {
    /// Every combination relevant to `method`, graph `k` outermost.
    pub fn lattice(&self, method: &MethodSpec) -> Vec<Hyperparams> {
        let base = self.base;
        let ks: Vec<usize> = match method.kind {
            ModelKind::Wsocp => self.k_graph.clone(),
            _ => vec![base.k_graph],
        };
        let kernels: Vec<Kernel> = if method.kernelized {
            self.gamma.iter().map(|&gamma| Kernel::Rbf { gamma }).collect()
        } else {
            vec![base.kernel]
        };
        let mut out = Vec::new();
        for &k_graph in &ks {
            for &kernel in &kernels {
                let hp = Hyperparams { k_graph, kernel, ..base };
                match method.kind {
                    ModelKind::Twsvm => {
                        for &c in &self.c {
                            for &cs in &self.c_slack {
                                out.push(Hyperparams { c1: c, c2: c, c3: cs, c4: cs, ..hp });
                            }
                        }
                    }
                    ModelKind::Socp | ModelKind::Wsocp => {
                        let caps: &[f64] = if method.kind == ModelKind::Wsocp {
                            &self.c
                        } else {
                            core::slice::from_ref(&base.c1)
                        };
                        for &theta in &self.theta {
                            for &c in caps {
                                for &eta1 in &self.eta1 {
                                    for &eta2 in &self.eta2 {
                                        out.push(Hyperparams {
                                            theta1: theta,
                                            theta2: theta,
                                            c1: c,
                                            c2: c,
                                            eta1,
                                            eta2,
                                            ..hp
                                        });
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Objective {
    #[default]
    Gmean,
    Accuracy,
}

impl Objective {
    pub fn score(self, rates: &Rates) -> f64 {
        match self {
            Objective::Gmean => rates.gmean,
            Objective::Accuracy => rates.accuracy,
        }
    }
}

impl core::str::FromStr for Objective {
    type Err = String;

    fn from_str(s: &str) -> core::result::Result<Self, String> {
        match s {
            "gmean" => Ok(Objective::Gmean),
            "accuracy" => Ok(Objective::Accuracy),
            other => Err(format!("unknown objective `{other}` (expected gmean or accuracy)")),
        }
    }
}

/// One standardized training split with the hyperparameter-independent
/// work (resampling, graph pruning per `k`) cached.
pub struct FoldContext<'m> {
    method: &'m MethodSpec,
    scaler: Standardizer,
    train: Dataset,
    classes: (Matrix, Matrix),
    sampled: BTreeMap<usize, Result<Option<Undersampled>>>,
}

impl<'m> FoldContext<'m> {
    pub fn new(raw_train: &Dataset, method: &'m MethodSpec, seed: u64) -> Result<Self> {
        let (standardized, scaler) = Standardizer::fit_dataset(raw_train)?;
        let train = method.preprocess.apply(&standardized, seed)?;
        train.require_classes(2)?;
        let classes = (train.class_rows(Label::Minority), train.class_rows(Label::Majority));
        Ok(FoldContext {
            method,
            scaler,
            train,
            classes,
            sampled: BTreeMap::new(),
        })
    }

    pub fn scaler(&self) -> &Standardizer {
        &self.scaler
    }

    /// Trains on the standardized split.
    pub fn fit(&mut self, hp: &Hyperparams) -> Result<TwinModel> {
        let (a, b) = &self.classes;
        let m = self.method;
        match m.kind {
            ModelKind::Twsvm if m.kernelized => train_twsvm_kernel(a, b, hp),
            ModelKind::Twsvm => train_twsvm_linear(a, b, hp),
            ModelKind::Socp => fit_socp(a, b, hp, [f64::INFINITY; 2], m.kernelized),
            ModelKind::Wsocp => {
                let train = &self.train;
                let sampled = self
                    .sampled
                    .entry(hp.k_graph)
                    .or_insert_with(|| undersample(train, hp.k_graph, m.wsocp.sampler));
                match sampled {
                    Ok(s) => fit_wsocp_sampled(train, s.as_ref(), hp, m.kernelized, &m.wsocp),
                    Err(e) => Err(e.clone()),
                }
            }
        }
    }

    /// Confusion matrix and AUC of `model` on raw (unstandardized) rows.
    pub fn evaluate(&self, model: &TwinModel, raw_test: &Dataset) -> Result<(ConfusionMatrix, f64)> {
        let test = self.scaler.transform_dataset(raw_test);
        let preds = model.predict_batch(test.features())?;
        let cm = ConfusionMatrix::from_pairs(test.labels().iter().copied().zip(preds.iter().map(|p| p.0)));
        let scores: Vec<(f64, Label)> = preds.iter().map(|p| p.1).zip(test.labels().iter().copied()).collect();
        Ok((cm, auc(&scores)?))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridChoice {
    pub hyperparams: Hyperparams,
    /// Mean inner-fold objective; `NaN` when the lattice was a singleton.
    pub score: f64,
    pub index: usize,
}

/// Picks the lattice point with the best mean inner-fold objective. Ties go
/// to the earlier point; a point that fails on any inner fold is skipped.
pub fn grid_search(
    train: &Dataset,
    method: &MethodSpec,
    lattice: &[Hyperparams],
    inner_k: usize,
    seed: u64,
    objective: Objective,
) -> Result<GridChoice> {
    match lattice {
        [] => {
            return Err(Error::InvalidParameter {
                name: "lattice size",
                value: 0.0,
            })
        }
        [only] => {
            return Ok(GridChoice {
                hyperparams: *only,
                score: f64::NAN,
                index: 0,
            })
        }
        _ => {}
    }
    let folds = stratified_kfold(train, inner_k, seed)?;
    let mut contexts = Vec::with_capacity(folds.len());
    for (i, (tr, te)) in folds.iter().enumerate() {
        let ctx = FoldContext::new(&train.subset(tr), method, derive_seed(seed, &[i as u64]))?;
        contexts.push((ctx, train.subset(te)));
    }

    let mut best: Option<GridChoice> = None;
    let mut last_err = None;
    'points: for (index, hp) in lattice.iter().enumerate() {
        let mut total = 0.0;
        for (ctx, test) in contexts.iter_mut() {
            let outcome = ctx.fit(hp).and_then(|m| ctx.evaluate(&m, test));
            match outcome {
                Ok((cm, _)) => total += objective.score(&metrics(&cm)),
                Err(e) => {
                    last_err = Some(e);
                    continue 'points;
                }
            }
        }
        let score = total / contexts.len() as f64;
        if best.as_ref().is_none_or(|b| score > b.score) {
            best = Some(GridChoice {
                hyperparams: *hp,
                score,
                index,
            });
        }
    }
    best.ok_or_else(|| Error::GridExhausted(alloc::boxed::Box::new(last_err.unwrap_or(Error::SingleClass))))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvConfig {
    pub outer_k: usize,
    pub runs: usize,
    pub inner_k: usize,
    pub seed: u64,
    pub objective: Objective,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            outer_k: 10,
            runs: 10,
            inner_k: 3,
            seed: 0,
            objective: Objective::Gmean,
        }
    }
}

/// One outer split of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct OuterSplit {
    pub run: usize,
    pub fold: usize,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// All outer splits, run-major; each run reshuffles the folds.
pub fn outer_splits(ds: &Dataset, cfg: &CvConfig) -> Result<Vec<OuterSplit>> {
    let mut out = Vec::with_capacity(cfg.runs * cfg.outer_k);
    for run in 0..cfg.runs {
        let folds = stratified_kfold(ds, cfg.outer_k, derive_seed(cfg.seed, &[run as u64]))?;
        for (fold, (train, test)) in folds.into_iter().enumerate() {
            out.push(OuterSplit { run, fold, train, test });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldResult {
    pub run: usize,
    pub fold: usize,
    pub confusion: ConfusionMatrix,
    pub rates: Rates,
    pub auc: f64,
    pub hyperparams: Hyperparams,
    pub info: TrainInfo,
}

/// Grid search on the training part, refit with the chosen point, score
/// on the test part.
pub fn run_outer_split(
    ds: &Dataset,
    method: &MethodSpec,
    lattice: &[Hyperparams],
    cfg: &CvConfig,
    split: &OuterSplit,
) -> Result<FoldResult> {
    let path = [split.run as u64, split.fold as u64];
    let train = ds.subset(&split.train);
    let test = ds.subset(&split.test);
    let choice = grid_search(
        &train,
        method,
        lattice,
        cfg.inner_k,
        derive_seed(cfg.seed ^ 0x1, &path),
        cfg.objective,
    )?;
    let mut ctx = FoldContext::new(&train, method, derive_seed(cfg.seed ^ 0x2, &path))?;
    let model = ctx.fit(&choice.hyperparams)?;
    let (confusion, auc) = ctx.evaluate(&model, &test)?;
    Ok(FoldResult {
        run: split.run,
        fold: split.fold,
        confusion,
        rates: metrics(&confusion),
        auc,
        hyperparams: choice.hyperparams,
        info: model.info,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    /// Mean and sample standard deviation (zero for a single value).
    pub fn of(values: &[f64]) -> MeanStd {
        let n = values.len();
        if n == 0 {
            return MeanStd { mean: f64::NAN, std: f64::NAN };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
            libm::sqrt(ss / (n - 1) as f64)
        } else {
            0.0
        };
        MeanStd { mean, std }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub dataset: String,
    pub method: String,
    /// Sorted by `(run, fold)`.
    pub folds: Vec<FoldResult>,
    pub accuracy: MeanStd,
    pub sensitivity: MeanStd,
    pub specificity: MeanStd,
    pub gmean: MeanStd,
    pub auc: MeanStd,
    /// Seconds, when the caller measured it.
    pub wall_time: Option<f64>,
}

impl EvalReport {
    /// Aggregates fold results in `(run, fold)` order, whatever order they arrive in.
    pub fn from_folds(dataset: &str, method: &str, mut folds: Vec<FoldResult>) -> EvalReport {
        folds.sort_by_key(|f| (f.run, f.fold));
        let col = |f: fn(&FoldResult) -> f64| MeanStd::of(&folds.iter().map(f).collect::<Vec<_>>());
        EvalReport {
            dataset: dataset.into(),
            method: method.into(),
            accuracy: col(|f| f.rates.accuracy),
            sensitivity: col(|f| f.rates.sensitivity),
            specificity: col(|f| f.rates.specificity),
            gmean: col(|f| f.rates.gmean),
            auc: col(|f| f.auc),
            folds,
            wall_time: None,
        }
    }
}

/// Sequential nested cross-validation.
pub fn nested_cv(ds: &Dataset, method: &MethodSpec, grid: &Grid, cfg: &CvConfig) -> Result<EvalReport> {
    let lattice = grid.lattice(method);
    let folds = outer_splits(ds, cfg)?
        .iter()
        .map(|s| run_outer_split(ds, method, &lattice, cfg, s))
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalReport::from_folds(ds.name(), &method.name(), folds))
}
