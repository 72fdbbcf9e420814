use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("modulus {0} is not a valid ring modulus (need q >= 2)")]
    InvalidModulus(u64),

    #[error("vector lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    #[error("index {index} out of range for extent {extent}")]
    IndexOutOfRange { index: usize, extent: usize },

    #[error("matrices are over different rings")]
    RingMismatch,

    #[error("strip is empty")]
    EmptyStrip,

    #[error("no erroneous entry found")]
    NoErrorFound,

    #[error("more than one erroneous row flagged: {0:?}")]
    MultipleRowsFlagged(Vec<usize>),

    #[error("error budget k = {k} exceeded: product still fails verification")]
    BudgetExceeded { k: usize },

    #[error("no corrections in {rounds} consecutive rounds ({remaining} errors supposedly remain)")]
    StalledTooLong { rounds: usize, remaining: usize },

    #[error("no strict majority for entry ({row}, {col})")]
    MajorityFailure { row: usize, col: usize },

    #[error("sketch decoding failed after {attempts} attempts")]
    RetriesExhausted { attempts: usize },

    #[error("k exceeds n^2 ({k} > {cells})")]
    KTooLarge { k: usize, cells: usize },

    #[error("algorithm {0} needs the error count k")]
    MissingK(String),

    #[error("hash parameters too large: n * s^2 must stay below 2^62 (n = {n}, s = {s})")]
    HashRangeTooLarge { n: usize, s: usize },
}
