//! Confusion-matrix rates and rank-based AUC. The minority class is positive.

use alloc::vec::Vec;

use crate::data::Label;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fn_: usize,
    pub tn: usize,
    pub fp: usize,
}

impl ConfusionMatrix {
    /// Tallies `(truth, prediction)` pairs.
    pub fn from_pairs<I: IntoIterator<Item = (Label, Label)>>(pairs: I) -> Self {
        let mut cm = ConfusionMatrix::default();
        for (truth, pred) in pairs {
            cm.record(truth, pred);
        }
        cm
    }

    pub fn record(&mut self, truth: Label, pred: Label) {
        match (truth, pred) {
            (Label::Minority, Label::Minority) => self.tp += 1,
            (Label::Minority, Label::Majority) => self.fn_ += 1,
            (Label::Majority, Label::Majority) => self.tn += 1,
            (Label::Majority, Label::Minority) => self.fp += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.tp + self.fn_ + self.tn + self.fp
    }

    pub fn positives(&self) -> usize {
        self.tp + self.fn_
    }

    pub fn negatives(&self) -> usize {
        self.tn + self.fp
    }

    /// Element-wise sum.
    pub fn merge(&self, other: &ConfusionMatrix) -> ConfusionMatrix {
        ConfusionMatrix {
            tp: self.tp + other.tp,
            fn_: self.fn_ + other.fn_,
            tn: self.tn + other.tn,
            fp: self.fp + other.fp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rates {
    pub accuracy: f64,
    pub sensitivity: f64,
    pub specificity: f64,
    pub gmean: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Accuracy, sensitivity, specificity and G-mean. A rate whose
/// denominator is zero is reported as 0.
pub fn metrics(cm: &ConfusionMatrix) -> Rates {
    let sensitivity = ratio(cm.tp, cm.positives());
    let specificity = ratio(cm.tn, cm.negatives());
    Rates {
        accuracy: ratio(cm.tp + cm.tn, cm.total()),
        sensitivity,
        specificity,
        gmean: libm::sqrt(sensitivity * specificity),
    }
}

/// Mann–Whitney AUC of minority-versus-majority scores; tied pairs count ½.
pub fn auc(scores: &[(f64, Label)]) -> Result<f64> {
    if scores.iter().any(|(s, _)| s.is_nan()) {
        return Err(Error::NonFinite);
    }
    let n_pos = scores.iter().filter(|(_, l)| *l == Label::Minority).count();
    let n_neg = scores.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].0.total_cmp(&scores[b].0));

    // Twice the rank sum of the positives, so tied groups stay integral.
    let mut rank_sum_x2: u64 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]].0 == scores[order[i]].0 {
            j += 1;
        }
        // Ranks i+1 ..= j+1 averaged: (i + j + 2) / 2.
        let twice_rank = (i + j + 2) as u64;
        let pos_in_group = order[i..=j]
            .iter()
            .filter(|&&k| scores[k].1 == Label::Minority)
            .count() as u64;
        rank_sum_x2 += twice_rank * pos_in_group;
        i = j + 1;
    }
    let p = n_pos as u64;
    let u_x2 = rank_sum_x2 - p * (p + 1);
    Ok(u_x2 as f64 / (2.0 * n_pos as f64 * n_neg as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pair_count_auc(scores: &[(f64, Label)]) -> f64 {
        let mut twice = 0u64;
        let (mut p, mut n) = (0u64, 0u64);
        for &(sp, lp) in scores {
            if lp != Label::Minority {
                n += 1;
                continue;
            }
            p += 1;
            for &(sn, ln) in scores {
                if ln == Label::Majority {
                    twice += if sp > sn { 2 } else if sp == sn { 1 } else { 0 };
                }
            }
        }
        twice as f64 / (2.0 * p as f64 * n as f64)
    }

    #[test]
    fn textbook_rates() {
        let r = metrics(&ConfusionMatrix { tp: 40, fn_: 10, tn: 90, fp: 10 });
        assert!((r.accuracy - 130.0 / 150.0).abs() < 1e-15);
        assert_eq!(r.sensitivity, 0.8);
        assert_eq!(r.specificity, 0.9);
        assert!((r.gmean - 0.848528137423857).abs() < 1e-12);
    }

    #[test]
    fn all_correct_and_total_miss() {
        let r = metrics(&ConfusionMatrix { tp: 3, fn_: 0, tn: 7, fp: 0 });
        assert_eq!((r.accuracy, r.sensitivity, r.specificity, r.gmean), (1.0, 1.0, 1.0, 1.0));
        let r = metrics(&ConfusionMatrix { tp: 0, fn_: 5, tn: 7, fp: 0 });
        assert_eq!((r.sensitivity, r.gmean), (0.0, 0.0));
        let r = metrics(&ConfusionMatrix { tp: 0, fn_: 0, tn: 4, fp: 1 });
        assert_eq!(r.sensitivity, 0.0);
    }

    #[test]
    fn auc_extremes_and_ties() {
        use Label::*;
        let ordered = [(0.1, Majority), (0.2, Majority), (0.8, Minority), (0.9, Minority)];
        assert_eq!(auc(&ordered).unwrap(), 1.0);
        let reversed = [(0.9, Majority), (0.8, Majority), (0.2, Minority), (0.1, Minority)];
        assert_eq!(auc(&reversed).unwrap(), 0.0);
        let tied = [(0.5, Majority), (0.5, Minority)];
        assert_eq!(auc(&tied).unwrap(), 0.5);
        assert_eq!(auc(&[(1.0, Minority)]), Err(Error::SingleClass));
    }

    #[test]
    fn auc_matches_pair_counting_on_seeded_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let scores: Vec<(f64, Label)> = (0..20)
                .map(|i| {
                    let l = if i % 3 == 0 { Label::Minority } else { Label::Majority };
                    ((rng.gen_range(0..8) as f64) / 4.0, l)
                })
                .collect();
            assert_eq!(auc(&scores).unwrap(), pair_count_auc(&scores));
        }
    }

    proptest! {
        #[test]
        fn gmean_squared_is_product(tp in 0usize..1000, fn_ in 0usize..1000, tn in 0usize..1000, fp in 0usize..1000) {
            let r = metrics(&ConfusionMatrix { tp, fn_, tn, fp });
            prop_assert!((r.gmean * r.gmean - r.sensitivity * r.specificity).abs() <= 1e-15);
            for v in [r.accuracy, r.sensitivity, r.specificity, r.gmean] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }

        #[test]
        fn auc_permutation_invariant(seed in 0u64..1000, n in 2usize..40) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut scores: Vec<(f64, Label)> = (0..n)
                .map(|i| (rng.gen_range(-3i32..3) as f64, if i == 0 { Label::Minority } else if i == 1 { Label::Majority } else if rng.gen_bool(0.3) { Label::Minority } else { Label::Majority }))
                .collect();
            let a = auc(&scores).unwrap();
            prop_assert_eq!(a, pair_count_auc(&scores));
            scores.reverse();
            scores.rotate_left(seed as usize % n);
            prop_assert_eq!(auc(&scores).unwrap(), a);
        }
    }

    #[test]
    fn merge_adds_counts() {
        let a = ConfusionMatrix { tp: 1, fn_: 2, tn: 3, fp: 4 };
        assert_eq!(a.merge(&a), ConfusionMatrix { tp: 2, fn_: 4, tn: 6, fp: 8 });
        let pairs = vec![(Label::Minority, Label::Majority), (Label::Majority, Label::Majority)];
        assert_eq!(ConfusionMatrix::from_pairs(pairs), ConfusionMatrix { tp: 0, fn_: 1, tn: 1, fp: 0 });
    }
}
