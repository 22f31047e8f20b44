use crate::error::{Error, Result};
use crate::linalg::{dot, sq_dist, Matrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel {
    /// `k(x, y) = xᵀy`
    Linear,
    /// `k(x, y) = exp(−γ‖x − y‖²)`
    Rbf { gamma: f64 },
}

impl Kernel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Kernel::Linear => Ok(()),
            Kernel::Rbf { gamma } if gamma > 0.0 && gamma.is_finite() => Ok(()),
            Kernel::Rbf { gamma } => Err(Error::InvalidParameter {
                name: "gamma",
                value: gamma,
            }),
        }
    }

    #[inline]
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match *self {
            Kernel::Linear => dot(x, y),
            Kernel::Rbf { gamma } => libm::exp(-gamma * sq_dist(x, y)),
        }
    }

    /// `K[i][j] = k(xᵢ, yⱼ)`.
    pub fn gram(&self, x: &Matrix, y: &Matrix) -> Matrix {
        let mut k = Matrix::zeros(x.rows(), y.rows());
        for i in 0..x.rows() {
            let xi = x.row(i);
            let row = k.row_mut(i);
            for (j, out) in row.iter_mut().enumerate() {
                *out = self.eval(xi, y.row(j));
            }
        }
        k
    }

    /// One row `k(x, ·)` against every row of `reference`.
    pub fn row(&self, x: &[f64], reference: &Matrix) -> alloc::vec::Vec<f64> {
        reference.iter_rows().map(|r| self.eval(x, r)).collect()
    }
}
