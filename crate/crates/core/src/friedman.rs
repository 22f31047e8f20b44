//! Friedman rank test across datasets. Within each dataset the best method
//! gets rank `n_methods`; tied methods share the average of their ranks.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct FriedmanResult {
    pub mean_ranks: Vec<f64>,
    pub chi_square: f64,
    pub n_datasets: usize,
    pub n_methods: usize,
}

/// Average ranks of one row, ascending: the largest value gets `len`.
pub fn rank_row(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j + 2) as f64 / 2.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// `table` has one row per dataset and one column per method; larger is better.
pub fn friedman_test(table: &Matrix) -> Result<FriedmanResult> {
    let (n, k) = (table.rows(), table.cols());
    if n < 2 {
        return Err(Error::TooFewSamples {
            what: "friedman datasets",
            needed: 2,
            found: n,
        });
    }
    if k < 2 {
        return Err(Error::TooFewSamples {
            what: "friedman methods",
            needed: 2,
            found: k,
        });
    }
    if !table.is_finite() {
        return Err(Error::NonFinite);
    }
    let mut sums = vec![0.0; k];
    for row in table.iter_rows() {
        for (s, r) in sums.iter_mut().zip(rank_row(row)) {
            *s += r;
        }
    }
    let mean_ranks: Vec<f64> = sums.iter().map(|s| s / n as f64).collect();
    let (nf, kf) = (n as f64, k as f64);
    let sq: f64 = mean_ranks.iter().map(|r| r * r).sum();
    let chi_square = 12.0 * nf / (kf * (kf + 1.0)) * (sq - kf * (kf + 1.0) * (kf + 1.0) / 4.0);
    Ok(FriedmanResult {
        mean_ranks,
        chi_square,
        n_datasets: n,
        n_methods: k,
    })
}
