//! Optimization kernels the classifiers reduce to.
//!
//! * [`box_qp_solve`]: `max lᵀα − ½αᵀQα` over `[0, upper]^m`, the dual of
//!   the classical twin SVM planes.
//! * [`ball_min_quadratic`]: `min Z(u)ᵀM⁻¹Z(u)` over `‖u‖ ≤ 1` with
//!   `Z(u) = [μ + κSu; 1]`.
//! * [`socp_dual_solve`]: the SOCP plane dual `max λ − ½λ²q(u)` with
//!   `0 ≤ λ ≤ cap`. For fixed `u` the best `λ` is `min(cap, 1/q)`, and the
//!   resulting value decreases in `q`, so the dual splits into the ball
//!   problem followed by a clamped closed form.
//!
//! Both iterative solvers are projected gradient methods with a
//! Barzilai–Borwein trial step and Armijo backtracking (constant `1e-4`).

mod ball;
mod box_qp;
mod socp;

pub use ball::{ball_min_quadratic, BallSolution};
pub use box_qp::{box_qp_solve, BoxQp, BoxQpSolution, QuadForm};
pub use socp::{socp_dual_solve, SocpDualProblem, SocpDualSolution};

use crate::linalg::Cholesky;

/// Armijo sufficient-decrease constant.
pub const ARMIJO: f64 = 1e-4;

const STEP_MIN: f64 = 1e-30;
const STEP_MAX: f64 = 1e30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-8,
            max_iter: 1000,
        }
    }
}

/// Receives one record per accepted iteration.
pub trait TraceSink {
    fn record(&mut self, iteration: usize, objective: f64, step_norm: f64);
}

/// Discards the trace.
#[derive(Debug, Default, Clone, Copy)]
pub struct NoTrace;

impl TraceSink for NoTrace {
    fn record(&mut self, _: usize, _: f64, _: f64) {}
}

impl<F: FnMut(usize, f64, f64)> TraceSink for F {
    fn record(&mut self, iteration: usize, objective: f64, step_norm: f64) {
        self(iteration, objective, step_norm)
    }
}

/// Something that applies `M⁻¹` for a symmetric positive definite `M`.
pub trait SpdSolve {
    fn dim(&self) -> usize;
    fn solve_in_place(&self, b: &mut [f64]);
}

impl SpdSolve for Cholesky {
    fn dim(&self) -> usize {
        Cholesky::dim(self)
    }

    fn solve_in_place(&self, b: &mut [f64]) {
        Cholesky::solve_in_place(self, b)
    }
}

/// Barzilai–Borwein step `sᵀs / sᵀy`, clamped; falls back to the maximum
/// step when the curvature along `s` vanishes.
fn bb_step(s: &[f64], y: &[f64]) -> f64 {
    let ss: f64 = s.iter().map(|v| v * v).sum();
    let sy: f64 = s.iter().zip(y).map(|(a, b)| a * b).sum();
    if sy > 0.0 {
        (ss / sy).clamp(STEP_MIN, STEP_MAX)
    } else {
        STEP_MAX
    }
}
