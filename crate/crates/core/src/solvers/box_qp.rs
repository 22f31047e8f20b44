use alloc::vec;
use alloc::vec::Vec;

use super::{bb_step, SolverOptions, TraceSink, ARMIJO, STEP_MAX, STEP_MIN};
use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};

/// Positive semidefinite quadratic form.
#[derive(Debug, Clone, PartialEq)]
pub enum QuadForm {
    /// `Q` stored explicitly.
    Dense(Matrix),
    /// `Q = FᵀF`, stored as `F`. Never forms `Q`.
    Gram(Matrix),
}

impl QuadForm {
    pub fn dim(&self) -> usize {
        match self {
            QuadForm::Dense(q) => q.rows(),
            QuadForm::Gram(f) => f.cols(),
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        match self {
            QuadForm::Dense(q) => q.mul_vec(x),
            QuadForm::Gram(f) => f.tr_mul_vec(&f.mul_vec(x)),
        }
    }

    /// Upper bound on the largest eigenvalue.
    fn spectral_bound(&self) -> f64 {
        match self {
            QuadForm::Dense(q) => q.norm_inf(),
            QuadForm::Gram(f) => f.frobenius_sq(),
        }
    }
}

/// `max lᵀα − ½αᵀQα` subject to `0 ≤ αᵢ ≤ upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxQp {
    pub q: QuadForm,
    pub linear: Vec<f64>,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxQpSolution {
    pub alpha: Vec<f64>,
    /// Dual objective `lᵀα − ½αᵀQα` at `alpha`.
    pub objective: f64,
    /// Largest projected-gradient violation at `alpha`.
    pub kkt_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Per-coordinate KKT violation of the minimization form, given its
/// gradient `g = Qα − l`.
fn kkt_residual(alpha: &[f64], g: &[f64], upper: f64) -> f64 {
    alpha.iter().zip(g).fold(0.0, |worst, (&a, &gi)| {
        let r = if a <= 0.0 {
            f64::max(-gi, 0.0)
        } else if a >= upper {
            f64::max(gi, 0.0)
        } else {
            gi.abs()
        };
        f64::max(worst, r)
    })
}

/// Projected Barzilai–Borwein gradient ascent on the box.
///
/// Starts at `α = 0` and stops once the KKT residual is at most `opts.tol`.
/// When the iteration budget runs out the best iterate is returned with
/// `converged = false`.
pub fn box_qp_solve<T: TraceSink>(
    problem: &BoxQp,
    opts: &SolverOptions,
    trace: &mut T,
) -> Result<BoxQpSolution> {
    let m = problem.q.dim();
    if problem.linear.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: problem.linear.len(),
        });
    }
    if let QuadForm::Dense(q) = &problem.q {
        if q.cols() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: q.cols(),
            });
        }
    }
    if problem.upper.is_nan() || problem.upper <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "upper",
            value: problem.upper,
        });
    }
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "tol",
            value: opts.tol,
        });
    }
    let upper = problem.upper;
    let l = &problem.linear;

    let mut alpha = vec![0.0; m];
    let mut q_alpha = vec![0.0; m];
    let mut grad: Vec<f64> = l.iter().map(|v| -v).collect();
    let mut f = 0.0;
    let bound = problem.q.spectral_bound();
    let mut step = if bound > 0.0 { 1.0 / bound } else { STEP_MAX };

    let mut residual = kkt_residual(&alpha, &grad, upper);
    let mut iterations = 0;
    let mut s = vec![0.0; m];
    while residual > opts.tol && iterations < opts.max_iter {
        iterations += 1;
        // The objective is quadratic, so the change along `s` is exactly
        // gᵀs + ½sᵀQs; no difference of nearly equal values is formed.
        let (qs, change) = loop {
            for i in 0..m {
                s[i] = (alpha[i] - step * grad[i]).clamp(0.0, upper) - alpha[i];
            }
            let qs = problem.q.apply(&s);
            let gs = dot(&grad, &s);
            let change = gs + 0.5 * dot(&s, &qs);
            if change <= ARMIJO * gs || step <= STEP_MIN {
                break (qs, change);
            }
            step *= 0.5;
        };
        let step_norm = libm::sqrt(dot(&s, &s));
        for i in 0..m {
            alpha[i] = (alpha[i] + s[i]).clamp(0.0, upper);
            q_alpha[i] += qs[i];
            grad[i] = q_alpha[i] - l[i];
        }
        f += change;
        residual = kkt_residual(&alpha, &grad, upper);
        trace.record(iterations, -f, step_norm);
        if step_norm == 0.0 {
            break;
        }
        step = bb_step(&s, &qs);
    }

    Ok(BoxQpSolution {
        alpha,
        objective: -f,
        kkt_residual: residual,
        iterations,
        converged: residual <= opts.tol,
    })
}
