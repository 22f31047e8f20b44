//! Majority pruning with a mutual k-NN graph, plus the random/SMOTE baselines.
//!
//! The graph sampler keeps every minority row and a majority row `i` only if
//! the weighted row sum of the mutual k-NN adjacency reaches the threshold.
//! With the default weight `τ = 1` the row sum is the mutual degree, which can
//! never exceed `k`, so a row survives only when all of its `k` nearest
//! neighbours list it back. Isolated points (degree 0) are always dropped.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::{Dataset, Label};
use crate::error::{Error, Result};
use crate::linalg::{sq_dist, Matrix};

/// Symmetric mutual k-NN adjacency. Entry `(i, j)` is `τ` when `i` and `j`
/// are among each other's `k` nearest neighbours and zero otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborGraph {
    k: usize,
    tau: f64,
    /// Sorted mutual neighbours of each point.
    adjacency: Vec<Vec<usize>>,
}

impl NeighborGraph {
    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    /// `Σⱼ Uᵢⱼ`
    pub fn row_sum(&self, i: usize) -> f64 {
        self.tau * self.degree(i) as f64
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if self.adjacency[i].binary_search(&j).is_ok() {
            self.tau
        } else {
            0.0
        }
    }

    pub fn to_dense(&self) -> Matrix {
        let n = self.len();
        let mut u = Matrix::zeros(n, n);
        for (i, nb) in self.adjacency.iter().enumerate() {
            for &j in nb {
                u[(i, j)] = self.tau;
            }
        }
        u
    }

    /// Keeps rows whose weighted row sum reaches `threshold`.
    pub fn mask(&self, threshold: f64) -> SampleMask {
        SampleMask::new((0..self.len()).map(|i| self.row_sum(i) >= threshold).collect())
    }
}

/// Which majority rows survive sampling (`uᵢ` in the pruning rule).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleMask {
    keep: Vec<bool>,
    kept: usize,
}

impl SampleMask {
    pub fn new(keep: Vec<bool>) -> Self {
        let kept = keep.iter().filter(|&&k| k).count();
        SampleMask { keep, kept }
    }

    pub fn keep(&self) -> &[bool] {
        &self.keep
    }

    pub fn kept_count(&self) -> usize {
        self.kept
    }

    pub fn len(&self) -> usize {
        self.keep.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keep.is_empty()
    }
}

/// Indices of the `k` nearest rows to `i` (excluding `i`), nearest first,
/// distance ties resolved towards the lower index.
fn nearest(points: &Matrix, i: usize, k: usize, scratch: &mut Vec<(f64, usize)>) -> Vec<usize> {
    scratch.clear();
    let xi = points.row(i);
    for j in 0..points.rows() {
        if j != i {
            scratch.push((sq_dist(xi, points.row(j)), j));
        }
    }
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < scratch.len() {
        scratch.select_nth_unstable_by(k - 1, cmp);
        scratch.truncate(k);
    }
    scratch.sort_unstable_by(cmp);
    scratch.iter().map(|&(_, j)| j).collect()
}

/// Mutual k-NN graph over the rows of `points` by Euclidean distance.
pub fn build_mutual_knn_graph(points: &Matrix, k: usize, tau: f64) -> Result<NeighborGraph> {
    let n = points.rows();
    if k == 0 {
        return Err(Error::InvalidParameter {
            name: "k",
            value: 0.0,
        });
    }
    if k >= n {
        return Err(Error::NeighborCountTooLarge { k, available: n });
    }
    if tau == 0.0 || !tau.is_finite() {
        return Err(Error::InvalidParameter {
            name: "tau",
            value: tau,
        });
    }
    let mut scratch = Vec::with_capacity(n);
    let mut knn: Vec<Vec<usize>> = (0..n).map(|i| nearest(points, i, k, &mut scratch)).collect();
    for nb in &mut knn {
        nb.sort_unstable();
    }
    let adjacency = (0..n)
        .map(|i| {
            knn[i]
                .iter()
                .copied()
                .filter(|&j| knn[j].binary_search(&i).is_ok())
                .collect()
        })
        .collect();
    Ok(NeighborGraph { k, tau, adjacency })
}

/// Rule deciding which majority rows the graph sampler keeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PruneRule {
    /// Keep rows with mutual degree at least this value.
    MinDegree(usize),
    /// Keep rows whose row sum `τ·degree` is at least `k`, with a
    /// non-unit `τ`. Only meaningful for comparison; `τ = 1` equals `MinDegree(k)`.
    WeightedSum { tau: f64 },
}

/// Graph sampler output: the reduced dataset and the mask over majority rows
/// (in their dataset order).
#[derive(Debug, Clone, PartialEq)]
pub struct Undersampled {
    pub dataset: Dataset,
    pub mask: SampleMask,
    /// Set when the guarded variant relaxed the rule to degree ≥ 1.
    pub relaxed: bool,
}

/// Keeps all minority rows and the majority rows whose mutual degree is ≥ k.
pub fn graph_undersample(ds: &Dataset, k: usize) -> Result<Undersampled> {
    graph_undersample_with(ds, k, PruneRule::MinDegree(k))
}

pub fn graph_undersample_with(ds: &Dataset, k: usize, rule: PruneRule) -> Result<Undersampled> {
    let majority_idx = ds.indices_of(Label::Majority);
    let majority = ds.features().select_rows(&majority_idx);
    let tau = match rule {
        PruneRule::MinDegree(_) => 1.0,
        PruneRule::WeightedSum { tau } => tau,
    };
    let graph = build_mutual_knn_graph(&majority, k, tau)?;
    let mask = match rule {
        PruneRule::MinDegree(d) => graph.mask(d as f64),
        PruneRule::WeightedSum { .. } => graph.mask(k as f64),
    };
    apply_mask(ds, &majority_idx, mask)
}

/// [`graph_undersample`] that falls back to degree ≥ 1 when the strict rule
/// would keep less than `min_kept_fraction` of the majority class.
pub fn graph_undersample_guarded(ds: &Dataset, k: usize, min_kept_fraction: f64) -> Result<Undersampled> {
    let majority_idx = ds.indices_of(Label::Majority);
    let majority = ds.features().select_rows(&majority_idx);
    let graph = build_mutual_knn_graph(&majority, k, 1.0)?;
    let strict = graph.mask(k as f64);
    if (strict.kept_count() as f64) >= min_kept_fraction * majority_idx.len() as f64 {
        return apply_mask(ds, &majority_idx, strict);
    }
    let mut out = apply_mask(ds, &majority_idx, graph.mask(1.0))?;
    out.relaxed = true;
    Ok(out)
}

fn apply_mask(ds: &Dataset, majority_idx: &[usize], mask: SampleMask) -> Result<Undersampled> {
    if mask.kept_count() == 0 {
        return Err(Error::EmptyMajority);
    }
    let mut keep_row = vec![true; ds.len()];
    for (&row, &keep) in majority_idx.iter().zip(mask.keep()) {
        keep_row[row] = keep;
    }
    let rows: Vec<usize> = (0..ds.len()).filter(|&i| keep_row[i]).collect();
    Ok(Undersampled {
        dataset: ds.subset(&rows),
        mask,
        relaxed: false,
    })
}

/// Drops majority rows uniformly at random until both classes have the same size.
pub fn random_undersample(ds: &Dataset, seed: u64) -> Result<Dataset> {
    ds.require_classes(1)?;
    let pos = ds.indices_of(Label::Minority);
    let neg = ds.indices_of(Label::Majority);
    if neg.len() <= pos.len() {
        return Ok(ds.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep = vec![false; ds.len()];
    for &i in &pos {
        keep[i] = true;
    }
    for pick in index::sample(&mut rng, neg.len(), pos.len()) {
        keep[neg[pick]] = true;
    }
    let rows: Vec<usize> = (0..ds.len()).filter(|&i| keep[i]).collect();
    Ok(ds.subset(&rows))
}

/// Appends uniformly drawn copies of minority rows until both classes have the same size.
pub fn random_oversample(ds: &Dataset, seed: u64) -> Result<Dataset> {
    ds.require_classes(1)?;
    let pos = ds.indices_of(Label::Minority);
    let deficit = ds.count(Label::Majority).saturating_sub(pos.len());
    if deficit == 0 {
        return Ok(ds.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows: Vec<usize> = (0..ds.len()).collect();
    rows.extend((0..deficit).map(|_| pos[rng.gen_range(0..pos.len())]));
    Ok(ds.subset(&rows))
}

/// SMOTE: appends synthetic minority rows `x + g·(x_nn − x)`, `g ~ U[0, 1)`,
/// where `x_nn` is one of the `k` nearest minority neighbours of a uniformly
/// drawn minority row `x`, until both classes have the same size.
pub fn smote(ds: &Dataset, k: usize, seed: u64) -> Result<Dataset> {
    ds.require_classes(1)?;
    let pos = ds.indices_of(Label::Minority);
    if k == 0 {
        return Err(Error::InvalidParameter {
            name: "k",
            value: 0.0,
        });
    }
    if pos.len() <= k {
        return Err(Error::NeighborCountTooLarge {
            k,
            available: pos.len(),
        });
    }
    let deficit = ds.count(Label::Majority).saturating_sub(pos.len());
    if deficit == 0 {
        return Ok(ds.clone());
    }
    let minority = ds.features().select_rows(&pos);
    let mut scratch = Vec::with_capacity(pos.len());
    let knn: Vec<Vec<usize>> = (0..pos.len())
        .map(|i| nearest(&minority, i, k, &mut scratch))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = ds.dim();
    let mut synth = Vec::with_capacity(deficit * d);
    for _ in 0..deficit {
        let i = rng.gen_range(0..pos.len());
        let j = knn[i][rng.gen_range(0..k)];
        let gap: f64 = rng.gen();
        let (xi, xj) = (minority.row(i), minority.row(j));
        synth.extend(xi.iter().zip(xj).map(|(a, b)| a + gap * (b - a)));
    }
    let synth = Matrix::from_vec(deficit, d, synth);
    let mut labels = ds.labels().to_vec();
    labels.resize(ds.len() + deficit, Label::Minority);
    Dataset::new(ds.name(), ds.features().vstack(&synth), labels)
}
