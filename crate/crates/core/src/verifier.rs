//! Freivalds-style tests.
//!
//! Every test compares `A (B v)` with `C' v` for a 0/1 vector `v` and reports
//! the coordinates that differ. `v` is never materialized as ring elements:
//! `B v` and `C' v` are sums of selected columns, so the only multiplications
//! charged are the `p * q` of `A (B v)`.

use rand::RngCore;

use crate::bits::{BitSource, SeededBits};
use crate::error::{Error, Result};
use crate::matrix::{mat_vec, vec_mat, ColIndexSet, IndexSet, Matrix, RowIndexSet};
use crate::ring::Ring;

/// Rows in which a test saw a discrepancy.
pub type MismatchSet = RowIndexSet;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VectorKind {
    AllOnes,
    StripDeterministic(ColIndexSet),
    /// Strip members with fair coin flips; the seed is informational.
    StripRandom(ColIndexSet),
    FullRandom,
}

/// A 0/1 test vector together with how it was produced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TestVector {
    coords: Vec<bool>,
    kind: VectorKind,
}

impl TestVector {
    pub fn all_ones(len: usize) -> Self {
        Self {
            coords: vec![true; len],
            kind: VectorKind::AllOnes,
        }
    }

    /// Coordinate `j` is 1 exactly when `j` belongs to the strip.
    pub fn strip_deterministic(strip: &ColIndexSet, len: usize) -> Self {
        Self {
            coords: strip.indicator(len),
            kind: VectorKind::StripDeterministic(strip.clone()),
        }
    }

    /// Zero off the strip, an independent fair bit on it.
    pub fn strip_random<S: RngCore>(strip: &ColIndexSet, len: usize, bits: &mut BitSource<S>) -> Self {
        let mut coords = vec![false; len];
        for &j in strip.iter() {
            coords[j] = bits.bit();
        }
        Self {
            coords,
            kind: VectorKind::StripRandom(strip.clone()),
        }
    }

    pub fn full_random<S: RngCore>(len: usize, bits: &mut BitSource<S>) -> Self {
        Self {
            coords: bits.bool_vec(len),
            kind: VectorKind::FullRandom,
        }
    }

    pub fn coords(&self) -> &[bool] {
        &self.coords
    }

    pub fn kind(&self) -> &VectorKind {
        &self.kind
    }

    fn support(&self) -> Vec<usize> {
        self.coords
            .iter()
            .enumerate()
            .filter_map(|(j, &on)| on.then_some(j))
            .collect()
    }
}

fn check_shapes<R: Ring>(a: &Matrix<R>, b: &Matrix<R>, c: &Matrix<R>) -> Result<()> {
    if a.cols() != b.rows() || a.rows() != c.rows() || b.cols() != c.cols() {
        return Err(Error::DimMismatch(format!(
            "A {}x{}, B {}x{}, C {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols(),
            c.rows(),
            c.cols()
        )));
    }
    if a.ring() != b.ring() || a.ring() != c.ring() {
        return Err(Error::RingMismatch);
    }
    Ok(())
}

/// Row sums of `m` restricted to the columns `support`.
fn select_sum<R: Ring>(m: &Matrix<R>, support: &[usize]) -> Vec<R::Elem> {
    let ring = *m.ring();
    (0..m.rows())
        .map(|i| {
            let row = m.row(i);
            support.iter().fold(ring.zero(), |acc, &j| ring.add(acc, row[j]))
        })
        .collect()
}

/// Compares `A (B v)` and `C v` where `v` is the indicator of `support`.
fn compare_on_support<R: Ring>(a: &Matrix<R>, b: &Matrix<R>, c: &Matrix<R>, support: &[usize]) -> MismatchSet {
    let bv = select_sum(b, support);
    let abv = mat_vec(a, &bv).expect("shapes checked");
    let cv = select_sum(c, support);
    let rows = abv
        .iter()
        .zip(&cv)
        .enumerate()
        .filter_map(|(i, (x, y))| (x != y).then_some(i))
        .collect();
    IndexSet::from_sorted(rows)
}

/// Runs one test with an explicit vector.
pub fn apply_test<R: Ring>(a: &Matrix<R>, b: &Matrix<R>, c: &Matrix<R>, v: &TestVector) -> Result<MismatchSet> {
    check_shapes(a, b, c)?;
    if v.coords.len() != c.cols() {
        return Err(Error::LengthMismatch {
            left: v.coords.len(),
            right: c.cols(),
        });
    }
    Ok(compare_on_support(a, b, c, &v.support()))
}

/// The deterministic all-ones test: flags every row whose error deltas do not
/// sum to zero.
pub fn all_ones_test<R: Ring>(a: &Matrix<R>, b: &Matrix<R>, c: &Matrix<R>) -> Result<MismatchSet> {
    check_shapes(a, b, c)?;
    let all: Vec<usize> = (0..c.cols()).collect();
    Ok(compare_on_support(a, b, c, &all))
}

/// Union of the mismatch rows over `rounds` independent uniformly random
/// 0/1 vectors. Each erroneous row shows up in a given round with
/// probability at least 1/2.
pub fn freivalds_rounds<R: Ring, S: RngCore>(
    a: &Matrix<R>,
    b: &Matrix<R>,
    c: &Matrix<R>,
    rounds: usize,
    bits: &mut BitSource<S>,
) -> Result<MismatchSet> {
    check_shapes(a, b, c)?;
    let mut flagged = vec![false; c.rows()];
    for _ in 0..rounds {
        let v = TestVector::full_random(c.cols(), bits);
        for &i in compare_on_support(a, b, c, &v.support()).iter() {
            flagged[i] = true;
        }
    }
    Ok(IndexSet::from_sorted(
        flagged
            .iter()
            .enumerate()
            .filter_map(|(i, &f)| f.then_some(i))
            .collect(),
    ))
}

/// Column counterpart of [`freivalds_rounds`]: compares `(u A) B` with `u C'`
/// for random 0/1 row vectors `u`, i.e. the row test on the transposed
/// problem, without materializing any transpose.
pub fn freivalds_rounds_cols<R: Ring, S: RngCore>(
    a: &Matrix<R>,
    b: &Matrix<R>,
    c: &Matrix<R>,
    rounds: usize,
    bits: &mut BitSource<S>,
) -> Result<MismatchSet> {
    check_shapes(a, b, c)?;
    let mut flagged = vec![false; c.cols()];
    for _ in 0..rounds {
        let u = bits.bool_vec(c.rows());
        let ua = select_row_sum(a, &u);
        let uab = vec_mat(&ua, b).expect("shapes checked");
        let uc = select_row_sum(c, &u);
        for (j, (x, y)) in uab.iter().zip(&uc).enumerate() {
            if x != y {
                flagged[j] = true;
            }
        }
    }
    Ok(IndexSet::from_sorted(
        flagged
            .iter()
            .enumerate()
            .filter_map(|(j, &f)| f.then_some(j))
            .collect(),
    ))
}

/// Column sums of `m` over the rows selected by `mask`.
fn select_row_sum<R: Ring>(m: &Matrix<R>, mask: &[bool]) -> Vec<R::Elem> {
    let ring = *m.ring();
    let mut out = vec![ring.zero(); m.cols()];
    for (i, _) in mask.iter().enumerate().filter(|(_, &on)| on) {
        for (o, &x) in out.iter_mut().zip(m.row(i)) {
            *o = ring.add(*o, x);
        }
    }
    out
}

/// Strip test with the strip's indicator vector. Any row whose deltas inside
/// the strip have a nonzero sum is flagged; in particular a row with exactly
/// one erroneous entry inside the strip always is.
pub fn test_strip_deterministic<R: Ring>(
    a: &Matrix<R>,
    b: &Matrix<R>,
    c: &Matrix<R>,
    strip: &ColIndexSet,
) -> Result<MismatchSet> {
    check_shapes(a, b, c)?;
    check_strip(strip, c.cols())?;
    Ok(compare_on_support(a, b, c, strip.as_slice()))
}

/// Strip test with a random vector supported on the strip: each row holding
/// at least one error inside the strip is flagged with probability >= 1/2.
/// Consumes one bit per strip member.
pub fn test_strip_random<R: Ring, S: RngCore>(
    a: &Matrix<R>,
    b: &Matrix<R>,
    c: &Matrix<R>,
    strip: &ColIndexSet,
    bits: &mut BitSource<S>,
) -> Result<MismatchSet> {
    check_shapes(a, b, c)?;
    check_strip(strip, c.cols())?;
    let support: Vec<usize> = strip.iter().copied().filter(|_| bits.bit()).collect();
    Ok(compare_on_support(a, b, c, &support))
}

fn check_strip(strip: &ColIndexSet, cols: usize) -> Result<()> {
    if strip.is_empty() {
        return Err(Error::EmptyStrip);
    }
    if let Some(&last) = strip.as_slice().last() {
        if last >= cols {
            return Err(Error::IndexOutOfRange {
                index: last,
                extent: cols,
            });
        }
    }
    Ok(())
}

/// Freivalds verification: `true` iff no round finds a discrepancy. Never
/// rejects a correct product; accepts a wrong one with probability at most
/// `2^-rounds`.
pub fn verify_product<R: Ring, S: RngCore>(
    a: &Matrix<R>,
    b: &Matrix<R>,
    c: &Matrix<R>,
    rounds: usize,
    bits: &mut BitSource<S>,
) -> Result<bool> {
    Ok(freivalds_rounds(a, b, c, rounds, bits)?.is_empty())
}

/// Seed of the fixed public test vectors used by [`verify_product_public`].
pub const PUBLIC_VECTOR_SEED: u64 = 0x6d61_7466_6978;

/// Verification with a fixed, input-independent sequence of test vectors.
/// Draws nothing from the caller's randomness, so deterministic correctors can
/// use it as a final sanity gate.
pub fn verify_product_public<R: Ring>(a: &Matrix<R>, b: &Matrix<R>, c: &Matrix<R>, rounds: usize) -> Result<bool> {
    let mut bits = SeededBits::seeded(PUBLIC_VECTOR_SEED);
    verify_product(a, b, c, rounds, &mut bits)
}

/// `ceil(log2 n)`, at least 1.
pub fn log2_ceil(n: usize) -> usize {
    if n <= 2 {
        1
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

/// The usual round count `c * ceil(log2 n)`.
pub fn default_rounds(c: usize, n: usize) -> usize {
    c.max(1) * log2_ceil(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::naive_multiply;
    use crate::ring::{ModPrime, Wrap64};

    fn two_by_two() -> (Matrix<ModPrime>, Matrix<ModPrime>, Matrix<ModPrime>) {
        let r = ModPrime::new(101).unwrap();
        let a = Matrix::from_u64_rows(r, &[vec![1, 2], vec![3, 4]]).unwrap();
        let b = Matrix::from_u64_rows(r, &[vec![5, 6], vec![7, 8]]).unwrap();
        let c = naive_multiply(&a, &b).unwrap();
        (a, b, c)
    }

    #[test]
    fn correct_product_never_flagged() {
        let (a, b, c) = two_by_two();
        let mut bits = SeededBits::seeded(1);
        assert!(freivalds_rounds(&a, &b, &c, 50, &mut bits).unwrap().is_empty());
        assert!(all_ones_test(&a, &b, &c).unwrap().is_empty());
        assert!(test_strip_deterministic(&a, &b, &c, &IndexSet::all(2)).unwrap().is_empty());
    }

    #[test]
    fn two_of_four_vectors_detect_corner_error() {
        // enumerate every v in {0,1}^2 against c'_11 = 20
        let (a, b, mut c) = two_by_two();
        c.set_entry(0, 0, 20);
        let mut detecting = 0;
        for mask in 0..4u8 {
            let coords = vec![mask & 1 == 1, mask & 2 == 2];
            let v = TestVector {
                coords,
                kind: VectorKind::FullRandom,
            };
            if apply_test(&a, &b, &c, &v).unwrap().contains(0) {
                detecting += 1;
            }
        }
        assert_eq!(detecting, 2);
        let mut bits = SeededBits::seeded(77);
        let rows = freivalds_rounds(&a, &b, &c, 32, &mut bits).unwrap();
        assert_eq!(rows.as_slice(), &[0]);
    }

    #[test]
    fn all_cells_off_by_one() {
        let r = ModPrime::new(7).unwrap();
        let n = 5;
        let a = Matrix::from_fn(r, n, n, |i, j| ((i + 2 * j) % 7) as u64);
        let b = Matrix::from_fn(r, n, n, |i, j| ((3 * i + j) % 7) as u64);
        let truth = naive_multiply(&a, &b).unwrap();
        let c = Matrix::from_fn(r, n, n, |i, j| r.add(truth.get(i, j), 1));
        let v = TestVector::all_ones(n);
        assert_eq!(apply_test(&a, &b, &c, &v).unwrap(), IndexSet::all(n));
    }

    #[test]
    fn strip_tests_single_and_cancelling() {
        let r = ModPrime::new(101).unwrap();
        let n = 6;
        let a = Matrix::from_fn(r, n, n, |i, j| (i * n + j) as u64 % 101);
        let b = Matrix::from_fn(r, n, n, |i, j| (i + j * j) as u64 % 101);
        let truth = naive_multiply(&a, &b).unwrap();

        let mut one = truth.clone();
        one.set_entry(2, 4, r.add(truth.get(2, 4), 9));
        let strip = IndexSet::new(vec![1, 4, 5], n).unwrap();
        assert_eq!(test_strip_deterministic(&a, &b, &one, &strip).unwrap().as_slice(), &[2]);
        let other = IndexSet::new(vec![0, 3], n).unwrap();
        assert!(test_strip_deterministic(&a, &b, &one, &other).unwrap().is_empty());

        // +d and -d in the same row and strip cancel out
        let mut pair = truth.clone();
        pair.set_entry(1, 1, r.add(truth.get(1, 1), 5));
        pair.set_entry(1, 4, r.sub(truth.get(1, 4), 5));
        assert!(test_strip_deterministic(&a, &b, &pair, &strip).unwrap().is_empty());
        let split = IndexSet::new(vec![1], n).unwrap();
        assert_eq!(test_strip_deterministic(&a, &b, &pair, &split).unwrap().as_slice(), &[1]);
    }

    #[test]
    fn column_rounds_match_transposed_row_rounds() {
        let (a, b, mut c) = two_by_two();
        c.set_entry(1, 0, 0);
        let mut x = SeededBits::seeded(8);
        let mut y = SeededBits::seeded(8);
        let cols = freivalds_rounds_cols(&a, &b, &c, 20, &mut x).unwrap();
        let via_t = freivalds_rounds(&b.transpose(), &a.transpose(), &c.transpose(), 20, &mut y).unwrap();
        assert_eq!(cols, via_t);
        assert_eq!(cols.as_slice(), &[0]);
        assert_eq!(x.consumed(), 40);
    }

    #[test]
    fn empty_strip_is_an_error() {
        let (a, b, c) = two_by_two();
        assert_eq!(
            test_strip_deterministic(&a, &b, &c, &IndexSet::default()),
            Err(Error::EmptyStrip)
        );
        let mut bits = SeededBits::seeded(0);
        assert_eq!(
            test_strip_random(&a, &b, &c, &IndexSet::default(), &mut bits),
            Err(Error::EmptyStrip)
        );
    }

    #[test]
    fn random_strip_consumes_one_bit_per_member() {
        let (a, b, c) = two_by_two();
        let mut bits = SeededBits::seeded(0);
        test_strip_random(&a, &b, &c, &IndexSet::all(2), &mut bits).unwrap();
        assert_eq!(bits.consumed(), 2);
        let v = TestVector::strip_random(&IndexSet::new(vec![1], 2).unwrap(), 2, &mut bits);
        assert!(!v.coords()[0]);
        assert!(matches!(v.kind(), VectorKind::StripRandom(_)));
    }

    #[test]
    fn verify_examples() {
        let (a, b, mut c) = two_by_two();
        let mut bits = SeededBits::seeded(3);
        assert!(verify_product(&a, &b, &c, 64, &mut bits).unwrap());
        c.set_entry(1, 0, 0);
        assert!(!verify_product(&a, &b, &c, 64, &mut bits).unwrap());
        assert!(!verify_product_public(&a, &b, &c, 64).unwrap());

        let r = Wrap64::new();
        let e = Matrix::zeros(r, 0, 0);
        assert!(verify_product(&e, &e, &e, 10, &mut bits).unwrap());
    }

    #[test]
    fn shape_errors() {
        let (a, b, _) = two_by_two();
        let c = Matrix::zeros(*a.ring(), 3, 2);
        assert!(matches!(all_ones_test(&a, &b, &c), Err(Error::DimMismatch(_))));
    }

    #[test]
    fn log2_ceil_values() {
        assert_eq!(log2_ceil(1), 1);
        assert_eq!(log2_ceil(2), 1);
        assert_eq!(log2_ceil(3), 2);
        assert_eq!(log2_ceil(64), 6);
        assert_eq!(log2_ceil(65), 7);
        assert_eq!(default_rounds(3, 64), 18);
    }
}
