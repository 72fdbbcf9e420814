//! Verification and correction of matrix products that may contain a few
//! wrong entries.
//!
//! Every algorithm is generic over a [`Ring`]; the aliases below cover the
//! scalar types used in practice.

pub mod bits;
pub mod cli;
pub mod compressed;
pub mod deterministic;
pub mod error;
pub mod fewbits;
pub mod format;
pub mod harness;
pub mod matrix;
pub mod primes;
pub mod randomized;
pub mod report;
pub mod ring;
pub mod single;
pub mod verifier;

pub use bits::{BitSource, SeededBits};
pub use error::{Error, Result};
pub use matrix::{naive_multiply, ColIndexSet, IndexSet, Matrix, RowIndexSet};
pub use report::{Correction, ErrorReport};
pub use ring::{ModPrime, Ring, RingContext, Wrap32, Wrap64, WrapRing};

/// Matrix over a prime field `Z/qZ`.
pub type ModMatrix = Matrix<ModPrime>;
/// Matrix over `u64` with wrapping arithmetic.
pub type WrapMatrix = Matrix<Wrap64>;
/// Matrix whose ring is picked at run time.
pub type DynMatrix = Matrix<RingContext>;
