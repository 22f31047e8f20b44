//! Twin support vector machines for imbalanced binary classification.
//!
//! Three classifier families share one set of building blocks:
//!
//! * classical twin SVM, trained through a box-constrained QP dual,
//! * SOCP twin SVM, where each plane must keep the opposite class's
//!   mean/covariance ellipsoid on its far side,
//! * weighted SOCP twin SVM, which first prunes the majority class with a
//!   mutual k-NN graph and then scales the slack penalties by class-size
//!   bias weights.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI and
//! the parallel benchmark runner live in the `twinsvm-bench` crate.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod classifiers;
pub mod cv;
pub mod data;
pub mod error;
pub mod friedman;
pub mod kernel;
pub mod linalg;
pub mod metrics;
pub mod sampling;
pub mod solvers;
pub mod weighting;

#[cfg(test)]
mod testutil;

pub use classifiers::{predict, ModelKind, Plane, TrainInfo, TwinModel};
pub use data::{ClassSummary, Dataset, Hyperparams, Label, Standardizer};
pub use error::{Error, Result};
pub use kernel::Kernel;
pub use linalg::Matrix;
