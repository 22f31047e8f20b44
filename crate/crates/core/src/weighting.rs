//! Class-level bias weights on the slack penalties of the weighted model.
//!
//! `d1` scales the penalty of the first (minority-fitting) plane, whose slack
//! measures violations by majority rows; `d2` scales the second plane's
//! penalty on minority violations. The problem whose slack penalizes errors
//! against the smaller class keeps weight 1 and the other one is shrunk to
//! `smaller / larger`, so both weights stay in `(0, 1]`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasWeights {
    pub d1: f64,
    pub d2: f64,
    pub n_pos: usize,
    pub n_neg_after: usize,
}

/// Weight convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightMode {
    /// `smaller/larger` on one side, 1 on the other. Both weights in `(0, 1]`.
    #[default]
    Ratio,
    /// Branch form with `d1 = n_neg/n_pos` when `n_pos < n_neg`,
    /// which exceeds 1. Kept for comparison runs.
    Literal,
    /// Both weights forced to 1.
    Unit,
}

/// Bias weights from the minority count and the majority count after sampling.
pub fn bias_weights(n_pos: usize, n_neg_after: usize) -> Result<BiasWeights> {
    bias_weights_with(n_pos, n_neg_after, WeightMode::Ratio)
}

pub fn bias_weights_with(n_pos: usize, n_neg_after: usize, mode: WeightMode) -> Result<BiasWeights> {
    if n_pos == 0 || n_neg_after == 0 {
        return Err(Error::TooFewSamples {
            what: "bias weights",
            needed: 1,
            found: 0,
        });
    }
    let (p, n) = (n_pos as f64, n_neg_after as f64);
    let (d1, d2) = match mode {
        WeightMode::Ratio if n_pos < n_neg_after => (1.0, p / n),
        WeightMode::Ratio => (n / p, 1.0),
        WeightMode::Literal if n_pos >= n_neg_after => (1.0, n / p),
        WeightMode::Literal => (n / p, 1.0),
        WeightMode::Unit => (1.0, 1.0),
    };
    Ok(BiasWeights {
        d1,
        d2,
        n_pos,
        n_neg_after,
    })
}
