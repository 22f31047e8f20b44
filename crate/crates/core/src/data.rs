//! Datasets, z-score scaling, per-class ellipsoid summaries and hyperparameters.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::linalg::{Cholesky, Matrix};

/// Class label. The minority class is always the positive class (`+1`),
/// the rows of `A` in the twin formulations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Minority,
    Majority,
}

impl Label {
    pub fn sign(self) -> i8 {
        match self {
            Label::Minority => 1,
            Label::Majority => -1,
        }
    }

    pub fn from_sign(s: i8) -> Label {
        if s > 0 {
            Label::Minority
        } else {
            Label::Majority
        }
    }

    pub fn other(self) -> Label {
        match self {
            Label::Minority => Label::Majority,
            Label::Majority => Label::Minority,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    features: Matrix,
    labels: Vec<Label>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, features: Matrix, labels: Vec<Label>) -> Result<Self> {
        if features.rows() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: features.rows(),
                found: labels.len(),
            });
        }
        if !features.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(Dataset {
            name: name.into(),
            features,
            labels,
        })
    }

    /// Builds a dataset from separate minority (`A`) and majority (`B`) blocks.
    pub fn from_classes(name: impl Into<String>, minority: &Matrix, majority: &Matrix) -> Result<Self> {
        if minority.cols() != majority.cols() {
            return Err(Error::DimensionMismatch {
                expected: minority.cols(),
                found: majority.cols(),
            });
        }
        let mut labels = vec![Label::Minority; minority.rows()];
        labels.resize(minority.rows() + majority.rows(), Label::Majority);
        Dataset::new(name, minority.vstack(majority), labels)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn count(&self, label: Label) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    pub fn indices_of(&self, label: Label) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.labels[i] == label).collect()
    }

    /// Rows of one class, in dataset order.
    pub fn class_rows(&self, label: Label) -> Matrix {
        self.features.select_rows(&self.indices_of(label))
    }

    pub fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            name: self.name.clone(),
            features: self.features.select_rows(idx),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    /// Same labels and name, new feature matrix (e.g. after scaling).
    pub fn with_features(&self, features: Matrix) -> Dataset {
        assert_eq!(features.rows(), self.len());
        Dataset {
            name: self.name.clone(),
            features,
            labels: self.labels.clone(),
        }
    }

    /// Errors unless both classes have at least `min_per_class` rows.
    pub fn require_classes(&self, min_per_class: usize) -> Result<()> {
        let (pos, neg) = (self.count(Label::Minority), self.count(Label::Majority));
        if pos == 0 || neg == 0 {
            return Err(Error::SingleClass);
        }
        let found = pos.min(neg);
        if found < min_per_class {
            return Err(Error::TooFewSamples {
                what: "each class",
                needed: min_per_class,
                found,
            });
        }
        Ok(())
    }
}

/// Per-column z-score scaling fitted on one matrix and replayable on others.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    mean: Vec<f64>,
    scale: Vec<f64>,
    constant: Vec<bool>,
}

impl Standardizer {
    /// Population mean and standard deviation per column. Constant columns
    /// are flagged and left untouched by [`transform`](Self::transform).
    pub fn fit(x: &Matrix) -> Result<Self> {
        let n = x.rows();
        if n < 2 {
            return Err(Error::TooFewSamples {
                what: "standardization",
                needed: 2,
                found: n,
            });
        }
        let d = x.cols();
        let mut mean = vec![0.0; d];
        for r in x.iter_rows() {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= n as f64;
        }
        let mut var = vec![0.0; d];
        for r in x.iter_rows() {
            for j in 0..d {
                let c = r[j] - mean[j];
                var[j] += c * c;
            }
        }
        let mut scale = vec![1.0; d];
        let mut constant = vec![false; d];
        for j in 0..d {
            let sd = libm::sqrt(var[j] / n as f64);
            if sd <= 1e-12 * f64::max(1.0, mean[j].abs()) {
                constant[j] = true;
                mean[j] = 0.0;
            } else {
                scale[j] = sd;
            }
        }
        Ok(Standardizer {
            mean,
            scale,
            constant,
        })
    }

    /// Fits on `ds` and returns the scaled dataset with its scaler.
    pub fn fit_dataset(ds: &Dataset) -> Result<(Dataset, Standardizer)> {
        let s = Standardizer::fit(ds.features())?;
        Ok((s.transform_dataset(ds), s))
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn scale(&self) -> &[f64] {
        &self.scale
    }

    pub fn constant_columns(&self) -> &[bool] {
        &self.constant
    }

    /// Rebuilds a scaler from stored parameters (used by model files).
    pub fn from_parts(mean: Vec<f64>, scale: Vec<f64>) -> Result<Self> {
        if mean.len() != scale.len() {
            return Err(Error::DimensionMismatch {
                expected: mean.len(),
                found: scale.len(),
            });
        }
        if let Some(&bad) = scale.iter().find(|s| !s.is_finite() || **s <= 0.0) {
            return Err(Error::InvalidParameter {
                name: "scale",
                value: bad,
            });
        }
        let constant = mean
            .iter()
            .zip(&scale)
            .map(|(&m, &s)| m == 0.0 && s == 1.0)
            .collect();
        Ok(Standardizer {
            mean,
            scale,
            constant,
        })
    }

    pub fn transform_row_in_place(&self, row: &mut [f64]) {
        for ((v, m), s) in row.iter_mut().zip(&self.mean).zip(&self.scale) {
            *v = (*v - m) / s;
        }
    }

    pub fn transform(&self, x: &Matrix) -> Matrix {
        assert_eq!(x.cols(), self.dim(), "standardizer dimension");
        let mut out = x.clone();
        for i in 0..out.rows() {
            self.transform_row_in_place(out.row_mut(i));
        }
        out
    }

    pub fn transform_dataset(&self, ds: &Dataset) -> Dataset {
        ds.with_features(self.transform(ds.features()))
    }

    pub fn inverse_transform(&self, x: &Matrix) -> Matrix {
        assert_eq!(x.cols(), self.dim(), "standardizer dimension");
        let mut out = x.clone();
        for i in 0..out.rows() {
            for ((v, m), s) in out.row_mut(i).iter_mut().zip(&self.mean).zip(&self.scale) {
                *v = *v * s + m;
            }
        }
        out
    }
}

/// Diagonal regularization added to a class covariance before factoring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Jitter {
    /// Fixed amount added to the diagonal.
    Absolute(f64),
    /// `factor · trace(Σ)/d`, floored at [`MIN_JITTER`].
    TraceRelative(f64),
}

impl Default for Jitter {
    fn default() -> Self {
        Jitter::TraceRelative(1e-8)
    }
}

/// Floor for trace-relative jitter when the covariance is exactly zero.
pub const MIN_JITTER: f64 = 1e-12;

/// How many times the jitter is multiplied by ten after a failed factorization.
pub const JITTER_ESCALATIONS: usize = 3;

impl Jitter {
    pub fn resolve(self, cov: &Matrix) -> f64 {
        match self {
            Jitter::Absolute(v) => v,
            Jitter::TraceRelative(f) => {
                let d = cov.rows().max(1) as f64;
                f64::max(f * cov.trace() / d, MIN_JITTER)
            }
        }
    }
}

/// Mean/covariance ellipsoid of one class, with `factor · factorᵀ = covariance + jitter·I`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassSummary {
    pub mean: Vec<f64>,
    pub covariance: Matrix,
    /// Lower-triangular Cholesky factor of the regularized covariance.
    pub factor: Matrix,
    pub count: usize,
    /// Jitter actually used, after any escalation.
    pub jitter: f64,
}

impl ClassSummary {
    /// Summarizes the rows of `points` (population covariance, divide by count).
    pub fn from_rows(points: &Matrix, jitter: Jitter) -> Result<Self> {
        let n = points.rows();
        if n < 2 {
            return Err(Error::TooFewSamples {
                what: "class summary",
                needed: 2,
                found: n,
            });
        }
        let d = points.cols();
        let mut mean = vec![0.0; d];
        for r in points.iter_rows() {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= n as f64;
        }
        let mut cov = Matrix::zeros(d, d);
        let mut c = vec![0.0; d];
        for r in points.iter_rows() {
            for j in 0..d {
                c[j] = r[j] - mean[j];
            }
            for i in 0..d {
                for j in i..d {
                    cov[(i, j)] += c[i] * c[j];
                }
            }
        }
        for i in 0..d {
            for j in i..d {
                let v = cov[(i, j)] / n as f64;
                cov[(i, j)] = v;
                cov[(j, i)] = v;
            }
        }

        let mut eps = jitter.resolve(&cov);
        let mut attempt = 0;
        loop {
            let mut reg = cov.clone();
            reg.add_diagonal(eps);
            match Cholesky::factor(&reg) {
                Ok(ch) => {
                    return Ok(ClassSummary {
                        mean,
                        covariance: cov,
                        factor: ch.into_factor(),
                        count: n,
                        jitter: eps,
                    })
                }
                Err(e) if attempt == JITTER_ESCALATIONS => return Err(e),
                Err(_) => {
                    attempt += 1;
                    eps *= 10.0;
                }
            }
        }
    }
}

/// Summary of the rows of `ds` carrying `label`.
pub fn summarize_class(ds: &Dataset, label: Label, jitter: Jitter) -> Result<ClassSummary> {
    ClassSummary::from_rows(&ds.class_rows(label), jitter)
}

/// Cone tightness `κ = √(η/(1−η))` for a tolerated error rate `η ∈ (0, 1)`.
pub fn kappa_from_eta(eta: f64) -> Result<f64> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidParameter {
            name: "eta",
            value: eta,
        });
    }
    Ok(libm::sqrt(eta / (1.0 - eta)))
}

/// Hyperparameters shared by all classifier families.
///
/// * TWSVM: `c1`, `c2` regularize, `c3`, `c4` weight the slacks.
/// * SOCP-TWSVM: `theta1`, `theta2` regularize; `eta1`, `eta2` set the cones.
/// * WSOCP-TWSVM: as SOCP-TWSVM, plus `c1`, `c2` (scaled by the bias
///   weights) cap the dual multipliers and `k_graph` drives under-sampling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparams {
    pub theta1: f64,
    pub theta2: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub k_graph: usize,
    pub kernel: Kernel,
    pub jitter: Jitter,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            theta1: 1e-6,
            theta2: 1e-6,
            c1: 1.0,
            c2: 1.0,
            c3: 1.0,
            c4: 1.0,
            eta1: 0.5,
            eta2: 0.5,
            k_graph: 5,
            kernel: Kernel::Linear,
            jitter: Jitter::default(),
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("theta1", self.theta1),
            ("theta2", self.theta2),
            ("c1", self.c1),
            ("c2", self.c2),
            ("c3", self.c3),
            ("c4", self.c4),
        ];
        for (name, value) in positive {
            if value.is_nan() || value <= 0.0 {
                return Err(Error::InvalidParameter { name, value });
            }
        }
        kappa_from_eta(self.eta1)?;
        kappa_from_eta(self.eta2)?;
        if self.k_graph == 0 {
            return Err(Error::InvalidParameter {
                name: "k_graph",
                value: 0.0,
            });
        }
        self.kernel.validate()
    }

    pub fn kappa1(&self) -> Result<f64> {
        kappa_from_eta(self.eta1)
    }

    pub fn kappa2(&self) -> Result<f64> {
        kappa_from_eta(self.eta2)
    }
}
