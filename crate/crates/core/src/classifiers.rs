//! The three twin-plane classifier families, in linear and kernel form.
//!
//! Plane 1 is fitted to the minority rows `A` and pushed away from the
//! majority rows `B`; plane 2 the other way round. A point is assigned to the
//! class of the nearer plane.
//!
//! Both SOCP families reduce each plane to the canonical dual of
//! [`socp_dual_solve`]. Plane 1 is canonical as is:
//! `−(wᵀμ_B + b) ≥ 1 − ξ + κ₂‖S_Bᵀw‖`. Plane 2's constraint
//! `wᵀμ_A + b ≥ 1 − ξ + κ₁‖S_Aᵀw‖` becomes canonical after `[w; b] → −[w; b]`.
//!
//! In kernel form every `x` is replaced by its kernel row `K(x, X)` against
//! the retained reference rows `X = [A; B]`, the opposite-class mean by the
//! mean kernel row, and the covariance factor by the centred kernel rows
//! scaled by `1/√m`.

use alloc::borrow::Cow;
use alloc::vec;
use alloc::vec::Vec;

use crate::data::{ClassSummary, Dataset, Hyperparams, Jitter, Label};
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::linalg::{dot, norm, Cholesky, Matrix};
use crate::sampling::{graph_undersample, graph_undersample_guarded, SampleMask, Undersampled};
use crate::solvers::{
    box_qp_solve, socp_dual_solve, BoxQp, NoTrace, QuadForm, SocpDualProblem, SolverOptions,
};
use crate::weighting::{bias_weights_with, BiasWeights, WeightMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    Twsvm,
    Socp,
    Wsocp,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Twsvm => "twsvm",
            ModelKind::Socp => "socp-twsvm",
            ModelKind::Wsocp => "wsocp-twsvm",
        }
    }
}

/// `f(x) = coefᵀφ(x) + bias`, with `norm` the length of the normal vector
/// in feature space.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    pub coef: Vec<f64>,
    pub bias: f64,
    pub norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Representation {
    Linear,
    Kernel { kernel: Kernel, reference: Matrix },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TrainInfo {
    pub converged: bool,
    /// The kernel matrix has collapsed to a constant.
    pub degenerate: bool,
    pub sampler_relaxed: bool,
    pub iterations: [usize; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwinModel {
    pub kind: ModelKind,
    pub representation: Representation,
    pub planes: [Plane; 2],
    pub weights: Option<BiasWeights>,
    pub mask: Option<SampleMask>,
    pub info: TrainInfo,
}

impl TwinModel {
    /// Input dimension.
    pub fn dim(&self) -> usize {
        match &self.representation {
            Representation::Linear => self.planes[0].coef.len(),
            Representation::Kernel { reference, .. } => reference.cols(),
        }
    }

    fn feature_map<'a>(&self, x: &'a [f64]) -> Cow<'a, [f64]> {
        match &self.representation {
            Representation::Linear => Cow::Borrowed(x),
            Representation::Kernel { kernel, reference } => Cow::Owned(kernel.row(x, reference)),
        }
    }

    /// Raw plane values `[f₁(x), f₂(x)]`.
    pub fn decision_values(&self, x: &[f64]) -> Result<[f64; 2]> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        let phi = self.feature_map(x);
        Ok([
            dot(&self.planes[0].coef, &phi) + self.planes[0].bias,
            dot(&self.planes[1].coef, &phi) + self.planes[1].bias,
        ])
    }

    /// Normalized distances `[d₁, d₂]` to the two planes.
    pub fn distances(&self, x: &[f64]) -> Result<[f64; 2]> {
        let f = self.decision_values(x)?;
        Ok([
            f[0].abs() / self.planes[0].norm,
            f[1].abs() / self.planes[1].norm,
        ])
    }

    pub fn predict_batch(&self, x: &Matrix) -> Result<Vec<(Label, f64)>> {
        x.iter_rows().map(|r| predict(self, r)).collect()
    }
}

/// Label of the nearer plane (ties go to the minority) and the score
/// `d₂ − d₁`, positive on the minority side.
pub fn predict(model: &TwinModel, x: &[f64]) -> Result<(Label, f64)> {
    let [d1, d2] = model.distances(x)?;
    let label = if d1 <= d2 {
        Label::Minority
    } else {
        Label::Majority
    };
    Ok((label, d2 - d1))
}

/// Augmented design matrices `H = [φ(A), e]`, `G = [φ(B), e]`.
struct Design {
    h: Matrix,
    g: Matrix,
    kernel: Option<(Kernel, Matrix)>,
    degenerate: bool,
}

impl Design {
    fn new(a: &Matrix, b: &Matrix, kernel: Option<Kernel>) -> Result<Design> {
        if a.cols() != b.cols() {
            return Err(Error::DimensionMismatch {
                expected: a.cols(),
                found: b.cols(),
            });
        }
        for (what, m) in [("minority rows", a), ("majority rows", b)] {
            if m.rows() < 2 {
                return Err(Error::TooFewSamples {
                    what,
                    needed: 2,
                    found: m.rows(),
                });
            }
            if !m.is_finite() {
                return Err(Error::NonFinite);
            }
        }
        match kernel {
            None => Ok(Design {
                h: a.augment_ones(),
                g: b.augment_ones(),
                kernel: None,
                degenerate: false,
            }),
            Some(k) => {
                k.validate()?;
                let x = a.vstack(b);
                let ka = k.gram(a, &x);
                let kb = k.gram(b, &x);
                let (lo, hi) = ka
                    .as_slice()
                    .iter()
                    .chain(kb.as_slice())
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
                let degenerate = hi - lo <= 1e-12 * f64::max(1.0, hi.abs());
                Ok(Design {
                    h: ka.augment_ones(),
                    g: kb.augment_ones(),
                    kernel: Some((k, x)),
                    degenerate,
                })
            }
        }
    }

    /// Columns holding `φ(·)`, without the trailing ones column.
    fn width(&self) -> usize {
        self.h.cols() - 1
    }

    /// Mean and covariance factor of one class in feature space.
    fn ellipsoid(&self, raw: &Matrix, label: Label, jitter: Jitter) -> Result<(Vec<f64>, Matrix)> {
        if self.kernel.is_none() {
            let s = ClassSummary::from_rows(raw, jitter)?;
            return Ok((s.mean, s.factor));
        }
        let rows = match label {
            Label::Minority => &self.h,
            Label::Majority => &self.g,
        };
        let (m, n) = (rows.rows(), self.width());
        let mut mean = vec![0.0; n];
        for r in rows.iter_rows() {
            for (acc, v) in mean.iter_mut().zip(&r[..n]) {
                *acc += v;
            }
        }
        for v in &mut mean {
            *v /= m as f64;
        }
        let scale = 1.0 / libm::sqrt(m as f64);
        let mut factor = Matrix::zeros(n, m);
        for (j, r) in rows.iter_rows().enumerate() {
            for i in 0..n {
                factor[(i, j)] = (r[i] - mean[i]) * scale;
            }
        }
        Ok((mean, factor))
    }

    fn plane(&self, wb: Vec<f64>, index: usize) -> Result<Plane> {
        let n = self.width();
        let coef = wb[..n].to_vec();
        let bias = wb[n];
        let norm = match &self.kernel {
            None => norm(&coef),
            Some(_) => {
                // sᵀK(X,X)s with K(X,X) = [K(A,X); K(B,X)].
                let quad: f64 = self
                    .h
                    .iter_rows()
                    .chain(self.g.iter_rows())
                    .zip(&coef)
                    .map(|(row, si)| si * dot(&row[..n], &coef))
                    .sum();
                libm::sqrt(quad.max(0.0))
            }
        };
        if !norm.is_finite() || norm <= 0.0 || !bias.is_finite() {
            return Err(Error::DegeneratePlane(index));
        }
        Ok(Plane { coef, bias, norm })
    }

    fn into_model(self, kind: ModelKind, planes: [Plane; 2], info: TrainInfo) -> TwinModel {
        let representation = match self.kernel {
            None => Representation::Linear,
            Some((kernel, reference)) => Representation::Kernel { kernel, reference },
        };
        TwinModel {
            kind,
            representation,
            planes,
            weights: None,
            mask: None,
            info: TrainInfo {
                degenerate: self.degenerate,
                ..info
            },
        }
    }
}

/// One classical plane: `max eᵀα − ½αᵀ G M⁻¹ Gᵀ α` on `[0, bound]` with
/// `M = HᵀH + reg·I`, then `[w; b] = sign · M⁻¹Gᵀα`.
fn twsvm_plane(fit: &Matrix, opposite: &Matrix, reg: f64, bound: f64, sign: f64) -> Result<(Vec<f64>, bool, usize)> {
    let mut m = fit.gram();
    m.add_diagonal(reg);
    let chol = Cholesky::factor(&m)?;
    let f = chol.forward_matrix(&opposite.transpose());
    let qp = BoxQp {
        q: QuadForm::Gram(f),
        linear: vec![1.0; opposite.rows()],
        upper: bound,
    };
    let sol = box_qp_solve(&qp, &SolverOptions::default(), &mut NoTrace)?;
    let QuadForm::Gram(f) = &qp.q else {
        unreachable!()
    };
    let mut v = f.mul_vec(&sol.alpha);
    chol.backward_in_place(&mut v);
    for x in &mut v {
        *x *= sign;
    }
    Ok((v, sol.converged, sol.iterations))
}

/// One SOCP plane in canonical form, flipped by `sign`.
#[allow(clippy::too_many_arguments)]
fn socp_plane(
    fit: &Matrix,
    mu: &[f64],
    s: &Matrix,
    kappa: f64,
    cap: f64,
    theta: f64,
    sign: f64,
) -> Result<(Vec<f64>, bool, usize)> {
    let mut m = fit.gram();
    m.add_diagonal(theta);
    let problem = SocpDualProblem {
        m: &m,
        mu,
        s,
        kappa,
        cap,
    };
    let sol = socp_dual_solve(&problem, &SolverOptions::default(), &mut NoTrace)?;
    let wb = sol.wb.iter().map(|v| sign * v).collect();
    Ok((wb, sol.converged, sol.iterations))
}

fn kernel_of(hp: &Hyperparams, kernelized: bool) -> Option<Kernel> {
    kernelized.then_some(hp.kernel)
}

fn fit_twsvm(a: &Matrix, b: &Matrix, hp: &Hyperparams, kernelized: bool) -> Result<TwinModel> {
    hp.validate()?;
    let design = Design::new(a, b, kernel_of(hp, kernelized))?;
    let (wb1, c1, i1) = twsvm_plane(&design.h, &design.g, hp.c1, hp.c3, -1.0)?;
    let (wb2, c2, i2) = twsvm_plane(&design.g, &design.h, hp.c2, hp.c4, 1.0)?;
    let planes = [design.plane(wb1, 0)?, design.plane(wb2, 1)?];
    let info = TrainInfo {
        converged: c1 && c2,
        iterations: [i1, i2],
        ..TrainInfo::default()
    };
    Ok(design.into_model(ModelKind::Twsvm, planes, info))
}

/// SOCP twin SVM with explicit multiplier caps `[plane 1, plane 2]`;
/// `f64::INFINITY` gives the hard-constraint model.
pub fn fit_socp(a: &Matrix, b: &Matrix, hp: &Hyperparams, caps: [f64; 2], kernelized: bool) -> Result<TwinModel> {
    hp.validate()?;
    let design = Design::new(a, b, kernel_of(hp, kernelized))?;
    let (mu_b, s_b) = design.ellipsoid(b, Label::Majority, hp.jitter)?;
    let (mu_a, s_a) = design.ellipsoid(a, Label::Minority, hp.jitter)?;
    let (wb1, c1, i1) = socp_plane(&design.h, &mu_b, &s_b, hp.kappa2()?, caps[0], hp.theta1, 1.0)?;
    let (wb2, c2, i2) = socp_plane(&design.g, &mu_a, &s_a, hp.kappa1()?, caps[1], hp.theta2, -1.0)?;
    let planes = [design.plane(wb1, 0)?, design.plane(wb2, 1)?];
    let info = TrainInfo {
        converged: c1 && c2,
        iterations: [i1, i2],
        ..TrainInfo::default()
    };
    Ok(design.into_model(ModelKind::Socp, planes, info))
}

pub fn train_twsvm_linear(a: &Matrix, b: &Matrix, hp: &Hyperparams) -> Result<TwinModel> {
    fit_twsvm(a, b, hp, false)
}

/// Kernel TWSVM with `hp.kernel`.
pub fn train_twsvm_kernel(a: &Matrix, b: &Matrix, hp: &Hyperparams) -> Result<TwinModel> {
    fit_twsvm(a, b, hp, true)
}

pub fn train_socp_twsvm_linear(a: &Matrix, b: &Matrix, hp: &Hyperparams) -> Result<TwinModel> {
    fit_socp(a, b, hp, [f64::INFINITY; 2], false)
}

pub fn train_socp_twsvm_kernel(a: &Matrix, b: &Matrix, hp: &Hyperparams) -> Result<TwinModel> {
    fit_socp(a, b, hp, [f64::INFINITY; 2], true)
}

/// How the weighted model prunes the majority class before fitting.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Sampler {
    Off,
    /// Keep majority rows with mutual degree ≥ `k_graph`.
    #[default]
    Graph,
    /// As `Graph`, relaxing to degree ≥ 1 when fewer than this fraction survive.
    Guarded { min_kept_fraction: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WsocpOptions {
    pub sampler: Sampler,
    pub weight_mode: WeightMode,
    /// Drop the multiplier caps (hard constraints).
    pub unbounded_caps: bool,
}

/// Runs the configured majority sampler.
pub fn undersample(ds: &Dataset, k: usize, sampler: Sampler) -> Result<Option<Undersampled>> {
    match sampler {
        Sampler::Off => Ok(None),
        Sampler::Graph => graph_undersample(ds, k).map(Some),
        Sampler::Guarded { min_kept_fraction } => graph_undersample_guarded(ds, k, min_kept_fraction).map(Some),
    }
}

/// Weighted SOCP twin SVM: sample, weight, then fit with caps `c₁D₁`, `c₂D₂`.
pub fn fit_wsocp(ds: &Dataset, hp: &Hyperparams, kernelized: bool, opts: &WsocpOptions) -> Result<TwinModel> {
    ds.require_classes(2)?;
    let sampled = undersample(ds, hp.k_graph, opts.sampler)?;
    fit_wsocp_sampled(ds, sampled.as_ref(), hp, kernelized, opts)
}

/// [`fit_wsocp`] with the sampler output already computed (`None` = no
/// sampling), so that callers can reuse it across hyperparameters.
pub fn fit_wsocp_sampled(
    ds: &Dataset,
    sampled: Option<&Undersampled>,
    hp: &Hyperparams,
    kernelized: bool,
    opts: &WsocpOptions,
) -> Result<TwinModel> {
    let reduced = sampled.map_or(ds, |s| &s.dataset);
    let a = reduced.class_rows(Label::Minority);
    let b = reduced.class_rows(Label::Majority);
    let weights = bias_weights_with(a.rows(), b.rows(), opts.weight_mode)?;
    let caps = if opts.unbounded_caps {
        [f64::INFINITY; 2]
    } else {
        [hp.c1 * weights.d1, hp.c2 * weights.d2]
    };
    let mut model = fit_socp(&a, &b, hp, caps, kernelized)?;
    model.kind = ModelKind::Wsocp;
    model.weights = Some(weights);
    if let Some(s) = sampled {
        model.mask = Some(s.mask.clone());
        model.info.sampler_relaxed = s.relaxed;
    }
    Ok(model)
}

pub fn train_wsocp_twsvm_linear(ds: &Dataset, hp: &Hyperparams) -> Result<TwinModel> {
    fit_wsocp(ds, hp, false, &WsocpOptions::default())
}

pub fn train_wsocp_twsvm_kernel(ds: &Dataset, hp: &Hyperparams) -> Result<TwinModel> {
    fit_wsocp(ds, hp, true, &WsocpOptions::default())
}
