use alloc::vec::Vec;

use super::{ball_min_quadratic, SolverOptions, TraceSink};
use crate::error::{Error, Result};
use crate::linalg::{Cholesky, Matrix};

/// `max λ − ½λ² Z(u)ᵀM⁻¹Z(u)` over `0 ≤ λ ≤ cap`, `‖u‖ ≤ 1`, with
/// `Z(u) = [μ + κSu; 1]`. `cap = ∞` gives the hard-margin dual.
#[derive(Debug, Clone, Copy)]
pub struct SocpDualProblem<'a> {
    pub m: &'a Matrix,
    pub mu: &'a [f64],
    pub s: &'a Matrix,
    pub kappa: f64,
    pub cap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SocpDualSolution {
    pub lambda: f64,
    pub u: Vec<f64>,
    pub q_value: f64,
    pub objective: f64,
    /// Primal plane `[w; b] = −λ M⁻¹ Z(u)`.
    pub wb: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

pub fn socp_dual_solve<T: TraceSink>(
    problem: &SocpDualProblem<'_>,
    opts: &SolverOptions,
    trace: &mut T,
) -> Result<SocpDualSolution> {
    let d = problem.mu.len();
    if problem.m.rows() != d + 1 || problem.m.cols() != d + 1 {
        return Err(Error::DimensionMismatch {
            expected: d + 1,
            found: problem.m.rows(),
        });
    }
    if problem.cap.is_nan() || problem.cap <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "cap",
            value: problem.cap,
        });
    }
    let chol = Cholesky::factor(problem.m)?;
    let ball = ball_min_quadratic(&chol, problem.mu, problem.s, problem.kappa, opts, trace)?;

    let su = problem.s.mul_vec(&ball.u);
    let z: Vec<f64> = problem
        .mu
        .iter()
        .zip(&su)
        .map(|(m, v)| m + problem.kappa * v)
        .chain(core::iter::once(1.0))
        .collect();
    let y = chol.solve(&z);
    let q = crate::linalg::dot(&z, &y);
    if !q.is_finite() {
        return Err(Error::NonFinite);
    }
    let lambda = if q > 0.0 {
        f64::min(problem.cap, 1.0 / q)
    } else if problem.cap.is_finite() {
        problem.cap
    } else {
        return Err(Error::DegenerateDual(q));
    };
    let wb = y.iter().map(|v| -lambda * v).collect();
    Ok(SocpDualSolution {
        lambda,
        u: ball.u,
        q_value: q,
        objective: lambda - 0.5 * lambda * lambda * q,
        wb,
        iterations: ball.iterations,
        converged: ball.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dot, norm};
    use crate::solvers::NoTrace;
    use alloc::vec;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn solve(m: &Matrix, mu: &[f64], s: &Matrix, kappa: f64, cap: f64) -> Result<SocpDualSolution> {
        let p = SocpDualProblem { m, mu, s, kappa, cap };
        socp_dual_solve(&p, &SolverOptions::default(), &mut NoTrace)
    }

    #[test]
    fn identity_metric_closed_form() {
        let m = Matrix::identity(3);
        let s = Matrix::identity(2);
        let sol = solve(&m, &[3.0, 4.0], &s, 0.0, f64::INFINITY).unwrap();
        assert!((sol.q_value - 26.0).abs() < 1e-12);
        assert!((sol.lambda - 1.0 / 26.0).abs() < 1e-15);
        assert!((sol.objective - 1.0 / 52.0).abs() < 1e-15);
        let expect = [-3.0 / 26.0, -4.0 / 26.0, -1.0 / 26.0];
        for (a, b) in sol.wb.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn cap_clamps_multiplier() {
        let m = Matrix::identity(3);
        let s = Matrix::identity(2);
        let sol = solve(&m, &[3.0, 4.0], &s, 0.0, 0.01).unwrap();
        assert_eq!(sol.lambda, 0.01);
        assert!((sol.objective - (0.01 - 0.5 * 1e-4 * 26.0)).abs() < 1e-15);
    }

    #[test]
    fn cone_pulls_mean_toward_origin() {
        // d = 1, μ = 1, S = 1, κ = 1: u = −1, Z = (0, 1), q = 1.
        let m = Matrix::identity(2);
        let s = Matrix::identity(1);
        let sol = solve(&m, &[1.0], &s, 1.0, f64::INFINITY).unwrap();
        assert!((sol.u[0] + 1.0).abs() < 1e-9);
        assert!((sol.q_value - 1.0).abs() < 1e-12);
        assert!((sol.lambda - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hard_dual_needs_positive_q() {
        // Singular in no direction, so q > 0 always for SPD M; a non-SPD M errors.
        let mut m = Matrix::identity(2);
        m[(1, 1)] = -1.0;
        let s = Matrix::identity(1);
        assert!(matches!(
            solve(&m, &[0.0], &s, 0.5, f64::INFINITY),
            Err(Error::NotPositiveDefinite { .. })
        ));
        assert!(solve(&Matrix::identity(2), &[0.0], &s, 0.5, 0.0).is_err());
    }

    #[test]
    fn capped_example_matches_joint_grid() {
        let m = Matrix::identity(3);
        let s = Matrix::diag(&[1.0, 2.0]);
        let mu = [1.0, 1.0];
        let sol = solve(&m, &mu, &s, 0.5, 0.3).unwrap();
        let mut best = (f64::NEG_INFINITY, 0.0, [0.0; 2]);
        for i in 0..=200 {
            for j in 0..=200 {
                let u = [-1.0 + i as f64 / 100.0, -1.0 + j as f64 / 100.0];
                if u[0] * u[0] + u[1] * u[1] > 1.0 {
                    continue;
                }
                let z = [1.0 + 0.5 * u[0], 1.0 + u[1], 1.0];
                let q = dot(&z, &z);
                for k in 0..=300 {
                    let l = k as f64 / 1000.0;
                    let v = l - 0.5 * l * l * q;
                    if v > best.0 {
                        best = (v, l, u);
                    }
                }
            }
        }
        let (_, l, u) = best;
        assert!((sol.lambda - l).abs() <= 5e-3);
        let wb = [-l * (1.0 + 0.5 * u[0]), -l * (1.0 + u[1]), -l];
        for (a, b) in sol.wb.iter().zip(wb) {
            assert!((a - b).abs() <= 5e-3, "{:?} vs {:?}", sol.wb, wb);
        }
    }

    fn random_instance(rng: &mut ChaCha8Rng, d: usize) -> (Matrix, Vec<f64>, Matrix) {
        let mut h = Matrix::zeros(d + 4, d + 1);
        for i in 0..d + 4 {
            for j in 0..d + 1 {
                h[(i, j)] = rng.gen_range(-1.0..1.0);
            }
        }
        let mut m = h.gram();
        m.add_diagonal(0.05);
        let mu = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let mut s = Matrix::zeros(d, d);
        for i in 0..d {
            for j in 0..=i {
                s[(i, j)] = rng.gen_range(-1.0..1.0);
            }
        }
        (m, mu, s)
    }

    #[test]
    fn matches_joint_grid_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..6 {
            let (m, mu, s) = random_instance(&mut rng, 2);
            let kappa = rng.gen_range(0.1..2.0);
            let cap = rng.gen_range(0.05..2.0);
            let sol = solve(&m, &mu, &s, kappa, cap).unwrap();
            let chol = Cholesky::factor(&m).unwrap();
            let mut best = f64::NEG_INFINITY;
            let (nr, nt, nl) = (80, 160, 200);
            for i in 0..=nr {
                let rho = i as f64 / nr as f64;
                for j in 0..nt {
                    let t = 2.0 * core::f64::consts::PI * j as f64 / nt as f64;
                    let u = [rho * libm::cos(t), rho * libm::sin(t)];
                    let su = s.mul_vec(&u);
                    let z = vec![mu[0] + kappa * su[0], mu[1] + kappa * su[1], 1.0];
                    let q = dot(&z, &chol.solve(&z));
                    for k in 0..=nl {
                        let l = cap * k as f64 / nl as f64;
                        best = best.max(l - 0.5 * l * l * q);
                    }
                }
            }
            assert!(sol.objective >= best - 1e-12, "{} < {}", sol.objective, best);
            assert!(sol.objective <= best + 1e-3 * best.abs().max(1e-3));
        }
    }

    proptest! {
        #[test]
        fn clamped_multiplier_leaves_nonnegative_slack(seed in 0u64..300, d in 1usize..6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (m, mu, s) = random_instance(&mut rng, d);
            let kappa = rng.gen_range(0.0..3.0);
            let free = solve(&m, &mu, &s, kappa, f64::INFINITY).unwrap();
            let cap = free.lambda * rng.gen_range(0.05..0.95);
            let sol = solve(&m, &mu, &s, kappa, cap).unwrap();
            prop_assert_eq!(sol.lambda, cap);
            let w = &sol.wb[..d];
            let slack = 1.0 + kappa * norm(&s.tr_mul_vec(w)) + dot(w, &mu) + sol.wb[d];
            prop_assert!(slack >= -1e-8);
            prop_assert!((slack - (1.0 - cap * sol.q_value)).abs() < 1e-8);
        }

        #[test]
        fn primal_recovery_and_feasibility(seed in 0u64..300, d in 1usize..6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (m, mu, s) = random_instance(&mut rng, d);
            let kappa = rng.gen_range(0.0..3.0);
            let sol = solve(&m, &mu, &s, kappa, f64::INFINITY).unwrap();
            prop_assert!(sol.lambda > 0.0);
            // wb = −λ M⁻¹ Z(u).
            let mwb = m.mul_vec(&sol.wb);
            let su = s.mul_vec(&sol.u);
            for i in 0..d {
                prop_assert!((mwb[i] + sol.lambda * (mu[i] + kappa * su[i])).abs() < 1e-8);
            }
            prop_assert!((mwb[d] + sol.lambda).abs() < 1e-8);
            // Unclamped: −(wᵀμ + b) = 1 and the cone constraint is tight.
            let w = &sol.wb[..d];
            let margin = -(dot(w, &mu) + sol.wb[d]);
            let cone = kappa * norm(&s.tr_mul_vec(w));
            prop_assert!((sol.lambda * sol.q_value - 1.0).abs() < 1e-9);
            prop_assert!(margin - cone >= 1.0 - 1e-6, "margin {} cone {}", margin, cone);
            prop_assert!((margin - cone - 1.0).abs() < 1e-5 * margin.abs().max(1.0));
        }
    }
}
