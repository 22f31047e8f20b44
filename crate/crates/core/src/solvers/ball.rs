use alloc::vec;
use alloc::vec::Vec;

use super::{bb_step, SolverOptions, SpdSolve, TraceSink, ARMIJO, STEP_MAX, STEP_MIN};
use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, Cholesky, Matrix};

#[derive(Debug, Clone, PartialEq)]
pub struct BallSolution {
    pub u: Vec<f64>,
    /// `Z(u)ᵀ M⁻¹ Z(u)` at `u`.
    pub q_value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// `q(u) = c + 2gᵀu + uᵀQu`, the quadratic restricted to the `r`
/// directions of `S`.
struct Reduced {
    c: f64,
    g: Vec<f64>,
    q: Matrix,
}

impl Reduced {
    fn new<M: SpdSolve>(m: &M, mu: &[f64], s: &Matrix, kappa: f64) -> Reduced {
        let d = mu.len();
        let r = s.cols();
        let mut y0: Vec<f64> = mu.iter().copied().chain(core::iter::once(1.0)).collect();
        let z0 = y0.clone();
        m.solve_in_place(&mut y0);
        let c = dot(&z0, &y0);

        // Columns of Y = M⁻¹P with P = [κS; 0].
        let mut q = Matrix::zeros(r, r);
        let mut g = vec![0.0; r];
        let mut cols: Vec<Vec<f64>> = Vec::with_capacity(r);
        let mut col = vec![0.0; d + 1];
        for j in 0..r {
            for i in 0..d {
                col[i] = kappa * s[(i, j)];
            }
            col[d] = 0.0;
            g[j] = dot(&col[..d], &y0[..d]);
            m.solve_in_place(&mut col);
            cols.push(col.clone());
        }
        for i in 0..r {
            for j in 0..r {
                q[(i, j)] = (0..d).map(|k| kappa * s[(k, i)] * cols[j][k]).sum();
            }
        }
        for i in 0..r {
            for j in i + 1..r {
                let v = 0.5 * (q[(i, j)] + q[(j, i)]);
                q[(i, j)] = v;
                q[(j, i)] = v;
            }
        }
        Reduced { c, g, q }
    }

    fn value(&self, u: &[f64], qu: &[f64]) -> f64 {
        self.c + 2.0 * dot(&self.g, u) + dot(u, qu)
    }
}

/// Exact minimizer of the reduced quadratic over the ball, treated as a
/// trust-region subproblem: the Newton point `−Q⁻¹g` when it is feasible,
/// otherwise `−(Q + σI)⁻¹g` with `σ > 0` solving `‖(Q + σI)⁻¹g‖ = 1` by
/// bracketed Newton steps on `1/‖p(σ)‖`.
fn trust_region_exact(red: &Reduced) -> Option<Vec<f64>> {
    let r = red.g.len();
    let rhs: Vec<f64> = red.g.iter().map(|v| -v).collect();
    if let Ok(chol) = Cholesky::factor(&red.q) {
        let p = chol.solve(&rhs);
        if dot(&p, &p) <= 1.0 {
            return Some(p);
        }
    }
    let gn = libm::sqrt(dot(&red.g, &red.g));
    if gn == 0.0 {
        return Some(vec![0.0; r]);
    }
    // ‖p(σ)‖ ≤ ‖g‖/σ, so σ = ‖g‖ is on the feasible side.
    let (mut lo, mut hi) = (0.0, gn);
    let mut sigma = 0.5 * gn;
    let mut best = None;
    for _ in 0..200 {
        let mut a = red.q.clone();
        a.add_diagonal(sigma);
        let Ok(chol) = Cholesky::factor(&a) else {
            lo = sigma;
            sigma = 0.5 * (lo + hi);
            continue;
        };
        let p = chol.solve(&rhs);
        let np = libm::sqrt(dot(&p, &p));
        if np > 1.0 {
            lo = sigma;
        } else {
            hi = sigma;
        }
        let mut w = p.clone();
        chol.forward_in_place(&mut w);
        let nw2 = dot(&w, &w);
        best = Some(p);
        if (np - 1.0).abs() <= 4.0 * f64::EPSILON || hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
        let newton = sigma + (np * np / nw2) * (np - 1.0);
        sigma = if newton > lo && newton < hi && newton.is_finite() {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    best.map(|mut p| {
        project_unit_ball(&mut p);
        p
    })
}

/// Both points are feasible, so the one closer to a KKT point wins; values
/// alone cannot separate them once they agree to rounding.
fn accept_if_better(red: &Reduced, u: &mut [f64], candidate: &[f64]) -> bool {
    let residual = |x: &[f64]| {
        let grad: Vec<f64> = red
            .q
            .mul_vec(x)
            .iter()
            .zip(&red.g)
            .map(|(qx, g)| 2.0 * (g + qx))
            .collect();
        stationarity(x, &grad)
    };
    if residual(candidate) < residual(u) {
        u.copy_from_slice(candidate);
        true
    } else {
        false
    }
}

/// `‖P(u − ∇q) − u‖`, zero exactly at a minimizer over the ball.
fn stationarity(u: &[f64], grad: &[f64]) -> f64 {
    let mut p: Vec<f64> = u.iter().zip(grad).map(|(a, g)| a - g).collect();
    project_unit_ball(&mut p);
    let d: Vec<f64> = p.iter().zip(u).map(|(a, b)| a - b).collect();
    libm::sqrt(dot(&d, &d))
}

fn project_unit_ball(u: &mut [f64]) {
    let n = libm::sqrt(dot(u, u));
    if n > 1.0 {
        for v in u {
            *v /= n;
        }
    }
}

/// Minimizes `q(u) = Z(u)ᵀ M⁻¹ Z(u)` over `‖u‖ ≤ 1`, where
/// `Z(u) = [μ + κSu; 1]`, `M` is `(d+1)×(d+1)` and `S` is `d×r`.
///
/// The quadratic is first reduced to its `r`-dimensional form, then
/// minimized by projected gradient from `u = 0`. Stops when the projected
/// gradient residual `‖P(u − ∇q) − u‖` is at most `opts.tol`.
pub fn ball_min_quadratic<M: SpdSolve, T: TraceSink>(
    m: &M,
    mu: &[f64],
    s: &Matrix,
    kappa: f64,
    opts: &SolverOptions,
    trace: &mut T,
) -> Result<BallSolution> {
    let d = mu.len();
    if m.dim() != d + 1 {
        return Err(Error::DimensionMismatch {
            expected: d + 1,
            found: m.dim(),
        });
    }
    if s.rows() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: s.rows(),
        });
    }
    if !kappa.is_finite() || kappa < 0.0 {
        return Err(Error::InvalidParameter {
            name: "kappa",
            value: kappa,
        });
    }
    let r = s.cols();
    let red = Reduced::new(m, mu, s, kappa);
    if kappa == 0.0 || r == 0 {
        return Ok(BallSolution {
            u: vec![0.0; r],
            q_value: red.c,
            iterations: 0,
            converged: true,
        });
    }

    let mut u = vec![0.0; r];
    let mut qu = vec![0.0; r];
    let mut f = red.c;
    let mut grad: Vec<f64> = red.g.iter().map(|v| 2.0 * v).collect();
    let bound = 2.0 * red.q.norm_inf();
    let mut step = if bound > 0.0 { 1.0 / bound } else { STEP_MAX };
    let mut s = vec![0.0; r];
    let mut iterations = 0;
    let mut converged = stationarity(&u, &grad) <= opts.tol;

    while !converged && iterations < opts.max_iter {
        iterations += 1;
        let (qs, change) = loop {
            s.copy_from_slice(&u);
            axpy(-step, &grad, &mut s);
            project_unit_ball(&mut s);
            for (si, ui) in s.iter_mut().zip(&u) {
                *si -= ui;
            }
            let qs = red.q.mul_vec(&s);
            let gs = dot(&grad, &s);
            let change = gs + dot(&s, &qs);
            if change <= ARMIJO * gs || step <= STEP_MIN {
                break (qs, change);
            }
            step *= 0.5;
        };
        let step_norm = libm::sqrt(dot(&s, &s));
        for i in 0..r {
            u[i] += s[i];
            qu[i] += qs[i];
            grad[i] = 2.0 * (red.g[i] + qu[i]);
        }
        f += change;
        trace.record(iterations, f, step_norm);
        converged = stationarity(&u, &grad) <= opts.tol;
        if step_norm == 0.0 {
            break;
        }
        let y: Vec<f64> = qs.iter().map(|v| 2.0 * v).collect();
        step = bb_step(&s, &y);
    }

    if trust_region_exact(&red).is_some_and(|p| accept_if_better(&red, &mut u, &p)) {
        qu = red.q.mul_vec(&u);
        f = red.value(&u, &qu);
        for i in 0..r {
            grad[i] = 2.0 * (red.g[i] + qu[i]);
        }
        converged = stationarity(&u, &grad) <= opts.tol;
    }

    Ok(BallSolution {
        u,
        q_value: f,
        iterations,
        converged,
    })
}
