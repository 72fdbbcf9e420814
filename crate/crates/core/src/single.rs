//! Deterministic repair of a product with exactly one wrong entry.
//!
//! The all-ones test on `(A, B, C')` can only differ in the row holding the
//! error, and the same test on `(B^T, A^T, C'^T)` names its column. Both tests
//! are linear in the number of input entries; one dot product then restores
//! the entry.

use crate::error::{Error, Result};
use crate::matrix::{entry_of_product, recompute_row, Matrix};
use crate::report::{Correction, ErrorReport};
use crate::ring::{counter, Ring};
use crate::verifier::all_ones_test;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SingleConfig {
    /// Recompute the whole flagged row instead of only the located entry.
    pub recompute_whole_row: bool,
}

pub fn correct_single_error<R: Ring>(
    a: &Matrix<R>,
    b: &Matrix<R>,
    c: &Matrix<R>,
) -> Result<(Matrix<R>, Correction<R::Elem>)> {
    correct_single_error_with(a, b, c, SingleConfig::default()).map(|(m, corr, _)| (m, corr))
}

pub fn correct_single_error_with<R: Ring>(
    a: &Matrix<R>,
    b: &Matrix<R>,
    c: &Matrix<R>,
    cfg: SingleConfig,
) -> Result<(Matrix<R>, Correction<R::Elem>, ErrorReport<R::Elem>)> {
    let (out, mults) = counter::measure(|| locate_and_fix(a, b, c, cfg));
    let (fixed, correction) = out?;
    let report = ErrorReport {
        corrections: vec![correction],
        ring_mults: mults,
        iterations: 1,
        ..ErrorReport::default()
    };
    Ok((fixed, correction, report))
}

fn locate_and_fix<R: Ring>(
    a: &Matrix<R>,
    b: &Matrix<R>,
    c: &Matrix<R>,
    cfg: SingleConfig,
) -> Result<(Matrix<R>, Correction<R::Elem>)> {
    let rows = all_ones_test(a, b, c)?;
    let cols = all_ones_test(&b.transpose(), &a.transpose(), &c.transpose())?;
    if rows.len() > 1 {
        return Err(Error::MultipleRowsFlagged(rows.into_vec()));
    }
    if cols.len() > 1 {
        // several columns disagree: report those coordinates instead
        return Err(Error::MultipleRowsFlagged(cols.into_vec()));
    }
    let (Some(&i), Some(&j)) = (rows.as_slice().first(), cols.as_slice().first()) else {
        return Err(Error::NoErrorFound);
    };

    let mut fixed = c.clone();
    let new = if cfg.recompute_whole_row {
        let row = recompute_row(a, b, i)?;
        for (col, &v) in row.iter().enumerate() {
            fixed.set_entry(i, col, v);
        }
        row[j]
    } else {
        let v = entry_of_product(a, b, i, j);
        fixed.set_entry(i, j, v);
        v
    };
    let old = c.get(i, j);
    if old == new {
        return Err(Error::NoErrorFound);
    }
    Ok((fixed, Correction { row: i, col: j, old, new }))
}
