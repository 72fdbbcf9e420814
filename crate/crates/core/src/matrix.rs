//! Dense row-major matrices over a [`Ring`], plus the naive product that
//! serves as ground truth everywhere else.

use crate::error::{Error, Result};
use crate::ring::{counter, dot_unchecked, Ring};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix<R: Ring> {
    rows: usize,
    cols: usize,
    data: Vec<R::Elem>,
    ring: R,
}

impl<R: Ring> Matrix<R> {
    pub fn new(ring: R, rows: usize, cols: usize, data: Vec<R::Elem>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self {
            rows,
            cols,
            data,
            ring,
        })
    }

    pub fn zeros(ring: R, rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ring.zero(); rows * cols],
            ring,
        }
    }

    pub fn identity(ring: R, n: usize) -> Self {
        Self::from_fn(ring, n, n, |i, j| if i == j { ring.one() } else { ring.zero() })
    }

    pub fn from_fn(ring: R, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> R::Elem) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self {
            rows,
            cols,
            data,
            ring,
        }
    }

    /// Builds a matrix from integer rows, reducing each entry into the ring.
    pub fn from_u64_rows(ring: R, rows: &[Vec<u64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimMismatch("ragged rows".into()));
        }
        Ok(Self::from_fn(ring, rows.len(), cols, |i, j| ring.from_u64(rows[i][j])))
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn ring(&self) -> &R {
        &self.ring
    }

    pub fn as_slice(&self) -> &[R::Elem] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> R::Elem {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j]
    }

    pub fn try_get(&self, i: usize, j: usize) -> Result<R::Elem> {
        self.check_index(i, j)?;
        Ok(self.get(i, j))
    }

    /// In-place overwrite, used only by correctors on their private copy.
    #[inline]
    pub fn set_entry(&mut self, i: usize, j: usize, v: R::Elem) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[R::Elem] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<R::Elem> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.ring, self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// Submatrix made of the listed rows, in order.
    pub fn extract_rows(&self, rows: &IndexSet) -> Result<Self> {
        rows.check_extent(self.rows)?;
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for &i in rows.iter() {
            data.extend_from_slice(self.row(i));
        }
        Self::new(self.ring, rows.len(), self.cols, data)
    }

    /// Submatrix made of the listed columns, in order.
    pub fn extract_cols(&self, cols: &IndexSet) -> Result<Self> {
        cols.check_extent(self.cols)?;
        Ok(Self::from_fn(self.ring, self.rows, cols.len(), |i, j| {
            self.get(i, cols.as_slice()[j])
        }))
    }

    /// Positions where `self` and `other` disagree.
    pub fn diff_positions(&self, other: &Self) -> Vec<(usize, usize)> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .enumerate()
            .filter(|(_, (a, b))| a != b)
            .map(|(idx, _)| (idx / self.cols, idx % self.cols))
            .collect()
    }

    fn check_index(&self, i: usize, j: usize) -> Result<()> {
        if i >= self.rows {
            return Err(Error::IndexOutOfRange {
                index: i,
                extent: self.rows,
            });
        }
        if j >= self.cols {
            return Err(Error::IndexOutOfRange {
                index: j,
                extent: self.cols,
            });
        }
        Ok(())
    }
}

fn same_ring<R: Ring>(a: &Matrix<R>, b: &Matrix<R>) -> Result<()> {
    if a.ring != b.ring {
        return Err(Error::RingMismatch);
    }
    Ok(())
}

/// The O(pqr) product. Charges `rows(A) * cols(B) * cols(A)` multiplications.
pub fn naive_multiply<R: Ring>(a: &Matrix<R>, b: &Matrix<R>) -> Result<Matrix<R>> {
    same_ring(a, b)?;
    if a.cols != b.rows {
        return Err(Error::DimMismatch(format!(
            "cannot multiply {}x{} by {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let ring = a.ring;
    let mut out = Matrix::zeros(ring, a.rows, b.cols);
    for i in 0..a.rows {
        let acc = &mut out.data[i * b.cols..(i + 1) * b.cols];
        for (k, &aik) in a.row(i).iter().enumerate() {
            for (o, &bkj) in acc.iter_mut().zip(b.row(k)) {
                *o = ring.add(*o, ring.mul(aik, bkj));
            }
        }
    }
    counter::charge((a.rows * b.cols * a.cols) as u64);
    Ok(out)
}

/// `M v` for a general vector; charges `rows * cols`.
pub fn mat_vec<R: Ring>(m: &Matrix<R>, v: &[R::Elem]) -> Result<Vec<R::Elem>> {
    if v.len() != m.cols {
        return Err(Error::DimMismatch(format!(
            "{}x{} matrix times length-{} vector",
            m.rows,
            m.cols,
            v.len()
        )));
    }
    Ok((0..m.rows).map(|i| dot_unchecked(&m.ring, m.row(i), v)).collect())
}

/// `v M` (row vector times matrix); charges `rows * cols`.
pub fn vec_mat<R: Ring>(v: &[R::Elem], m: &Matrix<R>) -> Result<Vec<R::Elem>> {
    if v.len() != m.rows {
        return Err(Error::DimMismatch(format!(
            "length-{} vector times {}x{} matrix",
            v.len(),
            m.rows,
            m.cols
        )));
    }
    let ring = m.ring;
    let mut out = vec![ring.zero(); m.cols];
    for (i, &vi) in v.iter().enumerate() {
        for (o, &x) in out.iter_mut().zip(m.row(i)) {
            *o = ring.add(*o, ring.mul(vi, x));
        }
    }
    counter::charge((m.rows * m.cols) as u64);
    Ok(out)
}

/// `M v` for a 0/1 vector given as a mask: sums the selected columns of each
/// row. Additions only, so nothing is charged.
pub fn mat_vec_01<R: Ring>(m: &Matrix<R>, mask: &[bool]) -> Result<Vec<R::Elem>> {
    if mask.len() != m.cols {
        return Err(Error::DimMismatch(format!(
            "{}x{} matrix times length-{} mask",
            m.rows,
            m.cols,
            mask.len()
        )));
    }
    let ring = m.ring;
    Ok((0..m.rows)
        .map(|i| {
            m.row(i)
                .iter()
                .zip(mask)
                .filter(|(_, &on)| on)
                .fold(ring.zero(), |acc, (&x, _)| ring.add(acc, x))
        })
        .collect())
}

/// Row `i` of `A B`; charges `cols(A) * cols(B)`.
pub fn recompute_row<R: Ring>(a: &Matrix<R>, b: &Matrix<R>, i: usize) -> Result<Vec<R::Elem>> {
    same_ring(a, b)?;
    if i >= a.rows {
        return Err(Error::IndexOutOfRange {
            index: i,
            extent: a.rows,
        });
    }
    vec_mat(a.row(i), b)
}

/// Entry `(i, j)` of `A B` as the dot product `A(i,*) . B(*,j)`.
pub fn recompute_entry<R: Ring>(a: &Matrix<R>, b: &Matrix<R>, i: usize, j: usize) -> Result<R::Elem> {
    same_ring(a, b)?;
    if a.cols != b.rows {
        return Err(Error::DimMismatch("inner dimensions differ".into()));
    }
    if i >= a.rows {
        return Err(Error::IndexOutOfRange {
            index: i,
            extent: a.rows,
        });
    }
    if j >= b.cols {
        return Err(Error::IndexOutOfRange {
            index: j,
            extent: b.cols,
        });
    }
    Ok(entry_of_product(a, b, i, j))
}

#[inline]
pub(crate) fn entry_of_product<R: Ring>(a: &Matrix<R>, b: &Matrix<R>, i: usize, j: usize) -> R::Elem {
    let ring = a.ring;
    counter::charge(a.cols as u64);
    a.row(i)
        .iter()
        .enumerate()
        .fold(ring.zero(), |acc, (k, &x)| ring.add(acc, ring.mul(x, b.get(k, j))))
}

/// Sorted, duplicate-free set of 0-based row or column indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct IndexSet(Vec<usize>);

pub type RowIndexSet = IndexSet;
pub type ColIndexSet = IndexSet;

impl IndexSet {
    /// Sorts and deduplicates `indices`, rejecting any `>= extent`.
    pub fn new(mut indices: Vec<usize>, extent: usize) -> Result<Self> {
        indices.sort_unstable();
        indices.dedup();
        if let Some(&last) = indices.last() {
            if last >= extent {
                return Err(Error::IndexOutOfRange { index: last, extent });
            }
        }
        Ok(Self(indices))
    }

    pub(crate) fn from_sorted(indices: Vec<usize>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        Self(indices)
    }

    pub fn all(extent: usize) -> Self {
        Self((0..extent).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, usize> {
        self.0.iter()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }

    /// 0/1 indicator of length `extent`.
    pub fn indicator(&self, extent: usize) -> Vec<bool> {
        let mut mask = vec![false; extent];
        for &i in &self.0 {
            mask[i] = true;
        }
        mask
    }

    fn check_extent(&self, extent: usize) -> Result<()> {
        match self.0.last() {
            Some(&last) if last >= extent => Err(Error::IndexOutOfRange { index: last, extent }),
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::SeededBits;
    use crate::ring::{ModPrime, Wrap64};

    fn m(q: u64) -> ModPrime {
        ModPrime::new(q).unwrap()
    }

    fn random_matrix<R: Ring>(ring: R, rows: usize, cols: usize, bits: &mut SeededBits) -> Matrix<R> {
        Matrix::from_fn(ring, rows, cols, |_, _| ring.random(bits))
    }

    #[test]
    fn small_products() {
        let r = m(101);
        let a = Matrix::from_u64_rows(r, &[vec![1, 2], vec![3, 4]]).unwrap();
        let b = Matrix::from_u64_rows(r, &[vec![5, 6], vec![7, 8]]).unwrap();
        let c = naive_multiply(&a, &b).unwrap();
        assert_eq!(c, Matrix::from_u64_rows(r, &[vec![19, 22], vec![43, 50]]).unwrap());
        assert_eq!(recompute_entry(&a, &b, 0, 0).unwrap(), 19);
        assert_eq!(recompute_row(&a, &b, 1).unwrap(), vec![43, 50]);

        let i2 = Matrix::identity(r, 2);
        assert_eq!(naive_multiply(&i2, &i2).unwrap(), i2);
        let z = Matrix::zeros(r, 2, 2);
        assert_eq!(naive_multiply(&a, &z).unwrap(), z);
    }

    #[test]
    fn naive_multiply_charges_pqr() {
        let r = m(101);
        let a = Matrix::zeros(r, 3, 4);
        let b = Matrix::zeros(r, 4, 5);
        let (_, mults) = counter::measure(|| naive_multiply(&a, &b).unwrap());
        assert_eq!(mults, 60);
    }

    #[test]
    fn mat_vec_examples() {
        let r = m(7);
        let a = Matrix::from_u64_rows(r, &[vec![1, 2], vec![3, 4]]).unwrap();
        assert_eq!(mat_vec(&a, &[1, 1]).unwrap(), vec![3, 0]);
        assert_eq!(mat_vec_01(&a, &[true, true]).unwrap(), vec![3, 0]);
        assert_eq!(mat_vec_01(&a, &[false, true]).unwrap(), vec![2, 4]);
        let id = Matrix::identity(r, 2);
        assert_eq!(mat_vec(&id, &[5, 6]).unwrap(), vec![5, 6]);
        assert_eq!(vec_mat(&[1, 1], &a).unwrap(), vec![4, 6]);
        assert!(matches!(mat_vec(&a, &[1]), Err(Error::DimMismatch(_))));
    }

    #[test]
    fn dimension_and_ring_errors() {
        let a = Matrix::zeros(m(7), 2, 3);
        assert!(matches!(naive_multiply(&a, &a), Err(Error::DimMismatch(_))));
        let b = Matrix::zeros(m(11), 3, 2);
        assert_eq!(naive_multiply(&a, &b), Err(Error::RingMismatch));
        assert!(Matrix::new(m(7), 2, 2, vec![0; 3]).is_err());
        assert!(matches!(
            recompute_entry(&a, &Matrix::zeros(m(7), 3, 2), 2, 0),
            Err(Error::IndexOutOfRange { index: 2, extent: 2 })
        ));
    }

    #[test]
    fn extraction() {
        let r = m(101);
        let a = Matrix::from_fn(r, 3, 4, |i, j| (10 * i + j) as u64);
        assert_eq!(a.extract_rows(&IndexSet::all(3)).unwrap(), a);
        assert_eq!(a.extract_cols(&IndexSet::all(4)).unwrap(), a);
        let rows = IndexSet::new(vec![2, 0, 2], 3).unwrap();
        assert_eq!(rows.as_slice(), &[0, 2]);
        let sub = a.extract_rows(&rows).unwrap();
        assert_eq!(sub.row(1), a.row(2));
        let cols = IndexSet::new(vec![3, 1], 4).unwrap();
        let sub = a.extract_cols(&cols).unwrap();
        assert_eq!(sub.col(0), a.col(1));
        assert!(IndexSet::new(vec![4], 4).is_err());
        assert!(a.extract_rows(&IndexSet::all(4)).is_err());
    }

    #[test]
    fn transpose_laws_on_random_instances() {
        let mut bits = SeededBits::seeded(42);
        for _ in 0..20 {
            let r = Wrap64::new();
            let a = random_matrix(r, 8, 8, &mut bits);
            let b = random_matrix(r, 8, 8, &mut bits);
            assert_eq!(a.transpose().transpose(), a);
            let ab_t = naive_multiply(&a, &b).unwrap().transpose();
            let bt_at = naive_multiply(&b.transpose(), &a.transpose()).unwrap();
            assert_eq!(ab_t, bt_at);
        }
    }

    #[test]
    fn associativity_through_vectors() {
        let mut bits = SeededBits::seeded(5);
        let r = m(1_000_003);
        for _ in 0..20 {
            let a = random_matrix(r, 8, 6, &mut bits);
            let b = random_matrix(r, 6, 7, &mut bits);
            let v: Vec<u64> = (0..7).map(|_| r.random(&mut bits)).collect();
            let lhs = mat_vec(&a, &mat_vec(&b, &v).unwrap()).unwrap();
            let rhs = mat_vec(&naive_multiply(&a, &b).unwrap(), &v).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn diff_positions_lists_mismatches() {
        let r = m(7);
        let a = Matrix::zeros(r, 2, 3);
        let mut b = a.clone();
        b.set_entry(1, 2, 3);
        b.set_entry(0, 0, 1);
        assert_eq!(a.diff_positions(&b), vec![(0, 0), (1, 2)]);
    }
}
