//! Seeded fixtures shared by unit tests.

use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::data::Dataset;
use crate::linalg::Matrix;

/// Standard normal draw by Box–Muller.
pub fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(2.0 * core::f64::consts::PI * u2)
}

/// `n` points around `center` with isotropic spread `sd`.
pub fn cloud(rng: &mut ChaCha8Rng, n: usize, center: &[f64], sd: f64) -> Matrix {
    let d = center.len();
    let data: Vec<f64> = (0..n * d).map(|i| center[i % d] + sd * gauss(rng)).collect();
    Matrix::from_vec(n, d, data)
}

pub fn two_clouds(rng: &mut ChaCha8Rng, n_min: usize, n_maj: usize, gap: f64) -> Dataset {
    let a = cloud(rng, n_min, &[gap, gap], 1.0);
    let b = cloud(rng, n_maj, &[-gap, -gap], 1.0);
    Dataset::from_classes("clouds", &a, &b).unwrap()
}
