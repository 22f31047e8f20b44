use alloc::boxed::Box;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{what} needs at least {needed} samples, found {found}")]
    TooFewSamples {
        what: &'static str,
        needed: usize,
        found: usize,
    },

    #[error("both classes must be present")]
    SingleClass,

    #[error("invalid value {value} for {name}")]
    InvalidParameter { name: &'static str, value: f64 },

    #[error("matrix is not positive definite (pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },

    #[error("neighbour count k = {k} must be smaller than the {available} available points")]
    NeighborCountTooLarge { k: usize, available: usize },

    #[error("under-sampling removed every majority row")]
    EmptyMajority,

    #[error("degenerate SOCP dual: q(u*) = {0} is not positive")]
    DegenerateDual(f64),

    #[error("plane {0} has a zero normal vector")]
    DegeneratePlane(usize),

    #[error("non-finite value in input")]
    NonFinite,

    #[error("every grid point failed to train; last error: {0}")]
    GridExhausted(Box<Error>),
}
