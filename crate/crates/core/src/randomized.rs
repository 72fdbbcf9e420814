//! Randomized correction by row/column localization and strip tests.
//!
//! Repeated Freivalds rounds on `(A, B, C')` and on the transposed problem
//! give the sets `R` of erroneous rows and `L` of erroneous columns; all
//! errors then live in the `|R| x |L|` submatrix `C1`. The columns `L` are cut
//! into contiguous strips, and a random test restricted to each strip flags the
//! strip-rows holding errors, which are recomputed.
//!
//! Without knowledge of `k` the strip count is driven by a guess `k'` that is
//! quadrupled whenever the tests flag more strip-rows than `k'` allows.

use rand::RngCore;

use crate::bits::BitSource;
use crate::deterministic::{ceil_sqrt, record};
use crate::error::{Error, Result};
use crate::matrix::{entry_of_product, recompute_row, ColIndexSet, IndexSet, Matrix, RowIndexSet};
use crate::report::{Correction, ErrorReport};
use crate::ring::{counter, Ring};
use crate::verifier::{freivalds_rounds, freivalds_rounds_cols, log2_ceil, test_strip_random, verify_product};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RandConfig {
    /// Test repetitions are `c_rounds * ceil(log2 n)`, but at least `min_rounds`.
    pub c_rounds: usize,
    /// Target failure probability `n^-alpha` for the localization step; the
    /// repetition factor is raised to `alpha + 1` if that is larger.
    pub confidence_alpha: usize,
    pub k_known: Option<usize>,
    /// Lower bound on test repetitions, which matters for small `n`.
    pub min_rounds: usize,
    /// Known-k mode: rounds in a row without a genuine correction before
    /// giving up. A lone remaining error is caught by a round with
    /// probability only 1/8, hence the large default.
    pub stall_rounds: usize,
    /// Unknown-k mode: stage-1 restarts before giving up.
    pub max_attempts: usize,
}

impl Default for RandConfig {
    fn default() -> Self {
        Self {
            c_rounds: 3,
            confidence_alpha: 1,
            k_known: None,
            min_rounds: 32,
            stall_rounds: 256,
            max_attempts: 64,
        }
    }
}

impl RandConfig {
    fn rounds(&self, n: usize) -> usize {
        (self.c_rounds.max(self.confidence_alpha + 1).max(1) * log2_ceil(n)).max(self.min_rounds)
    }
}

/// Dispatches on `cfg.k_known`.
pub fn correct_randomized<R: Ring, S: RngCore>(
    a: &Matrix<R>,
    b: &Matrix<R>,
    c: &Matrix<R>,
    cfg: &RandConfig,
    bits: &mut BitSource<S>,
) -> Result<(Matrix<R>, ErrorReport<R::Elem>)> {
    match cfg.k_known {
        Some(k) => correct_rand_known(a, b, c, k, cfg, bits),
        None => correct_rand_unknown(a, b, c, cfg, bits),
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

fn instrumented<R: Ring, S: RngCore>(
    bits: &mut BitSource<S>,
    f: impl FnOnce(&mut BitSource<S>) -> Result<(Matrix<R>, ErrorReport<R::Elem>)>,
) -> Result<(Matrix<R>, ErrorReport<R::Elem>)> {
    let start = bits.consumed();
    let (out, mults) = counter::measure(|| f(bits));
    let used = bits.consumed() - start;
    out.map(|(m, mut report)| {
        report.ring_mults = mults;
        report.random_bits = used;
        (m, report)
    })
}

/// `count` contiguous runs of near-equal length covering `0..len`.
fn contiguous_strips(len: usize, count: usize) -> Vec<ColIndexSet> {
    let count = count.clamp(1, len.max(1));
    (0..count)
        .map(|s| IndexSet::from_sorted((s * len / count..(s + 1) * len / count).collect()))
        .filter(|s| !s.is_empty())
        .collect()
}

/// Submatrix `C1` of `work` on rows `rows` and columns `cols`.
fn sub<R: Ring>(work: &Matrix<R>, rows: &RowIndexSet, cols: &ColIndexSet) -> Matrix<R> {
    work.extract_rows(rows)
        .and_then(|m| m.extract_cols(cols))
        .expect("index sets come from this matrix")
}

/// Recomputes whole rows of the product into `work`.
fn fix_rows<R: Ring>(
    a: &Matrix<R>,
    b: &Matrix<R>,
    work: &mut Matrix<R>,
    rows: &RowIndexSet,
    ledger: &mut Vec<Correction<R::Elem>>,
) -> Result<()> {
    for &i in rows.iter() {
        for (j, v) in recompute_row(a, b, i)?.into_iter().enumerate() {
            record(work, ledger, i, j, v, false);
        }
    }
    Ok(())
}

/// Recomputes whole columns of the product into `work`.
fn fix_cols<R: Ring>(
    a: &Matrix<R>,
    b: &Matrix<R>,
    work: &mut Matrix<R>,
    cols: &ColIndexSet,
    ledger: &mut Vec<Correction<R::Elem>>,
) {
    for &j in cols.iter() {
        for i in 0..work.rows() {
            let v = entry_of_product(a, b, i, j);
            record(work, ledger, i, j, v, false);
        }
    }
}

/// Strip-rows of `C1` flagged by `reps` random tests per strip, as
/// `(C1 row, strip)` pairs.
fn flag_strip_rows<R: Ring, S: RngCore>(
    a1: &Matrix<R>,
    b1: &Matrix<R>,
    c1: &Matrix<R>,
    strips: &[ColIndexSet],
    reps: usize,
    bits: &mut BitSource<S>,
) -> Result<Vec<(usize, usize)>> {
    let mut hits = Vec::new();
    for (s, strip) in strips.iter().enumerate() {
        let mut seen = vec![false; c1.rows()];
        for _ in 0..reps {
            for &r in test_strip_random(a1, b1, c1, strip, bits)?.iter() {
                seen[r] = true;
            }
        }
        hits.extend(seen.iter().enumerate().filter_map(|(r, &f)| f.then_some((r, s))));
    }
    Ok(hits)
}

/// Corrects any number of wrong entries without being told how many.
pub fn correct_rand_unknown<R: Ring, S: RngCore>(
    a: &Matrix<R>,
    b: &Matrix<R>,
    c: &Matrix<R>,
    cfg: &RandConfig,
    bits: &mut BitSource<S>,
) -> Result<(Matrix<R>, ErrorReport<R::Elem>)> {
    check_shapes(a, b, c)?;
    instrumented(bits, |bits| unknown_inner(a, b, c, cfg, bits))
}

fn unknown_inner<R: Ring, S: RngCore>(
    a: &Matrix<R>,
    b: &Matrix<R>,
    c: &Matrix<R>,
    cfg: &RandConfig,
    bits: &mut BitSource<S>,
) -> Result<(Matrix<R>, ErrorReport<R::Elem>)> {
    let n = c.rows().max(c.cols()).max(2);
    let logn = log2_ceil(n);
    let rounds = cfg.rounds(n);
    let mut work = c.clone();
    let mut report = ErrorReport::default();

    for attempt in 0..cfg.max_attempts {
        if attempt > 0 {
            report.restarts += 1;
        }
        report.iterations += 1;

        let rows = freivalds_rounds(a, b, &work, rounds, bits)?;
        if rows.is_empty() {
            return Ok((work, report));
        }
        if rows.len() <= logn || n < 4 {
            fix_rows(a, b, &mut work, &rows, &mut report.corrections)?;
            if verify_product(a, b, &work, rounds, bits)? {
                return Ok((work, report));
            }
            continue;
        }
        let cols = freivalds_rounds_cols(a, b, &work, rounds, bits)?;
        if cols.is_empty() {
            continue;
        }
        if cols.len() <= logn {
            fix_cols(a, b, &mut work, &cols, &mut report.corrections);
            if verify_product(a, b, &work, rounds, bits)? {
                return Ok((work, report));
            }
            continue;
        }

        let a1 = a.extract_rows(&rows)?;
        let b1 = b.extract_cols(&cols)?;
        let cells = rows.len() * cols.len();
        let mut guess = rows.len().max(cols.len()).max(4);
        loop {
            report.guesses.push(guess);
            let count = ceil_sqrt(guess.div_ceil(logn));
            let strips = contiguous_strips(cols.len(), count);
            let c1 = sub(&work, &rows, &cols);
            let hits = flag_strip_rows(&a1, &b1, &c1, &strips, rounds, bits)?;
            if hits.len() <= guess {
                // staged hits are only now turned into corrections
                for &(r, s) in &hits {
                    let i = rows.as_slice()[r];
                    for &l in strips[s].iter() {
                        let j = cols.as_slice()[l];
                        let v = entry_of_product(a, b, i, j);
                        record(&mut work, &mut report.corrections, i, j, v, false);
                    }
                }
                if verify_product(a, b, &work, rounds, bits)? {
                    return Ok((work, report));
                }
            }
            if guess >= cells {
                break;
            }
            report.restarts += 1;
            guess *= 4;
        }
    }
    Err(Error::RetriesExhausted {
        attempts: cfg.max_attempts,
    })
}

/// Corrects exactly `k_exact` wrong entries, one cheap round at a time.
pub fn correct_rand_known<R: Ring, S: RngCore>(
    a: &Matrix<R>,
    b: &Matrix<R>,
    c: &Matrix<R>,
    k_exact: usize,
    cfg: &RandConfig,
    bits: &mut BitSource<S>,
) -> Result<(Matrix<R>, ErrorReport<R::Elem>)> {
    check_shapes(a, b, c)?;
    instrumented(bits, |bits| known_inner(a, b, c, k_exact, cfg, bits))
}

fn known_inner<R: Ring, S: RngCore>(
    a: &Matrix<R>,
    b: &Matrix<R>,
    c: &Matrix<R>,
    k_exact: usize,
    cfg: &RandConfig,
    bits: &mut BitSource<S>,
) -> Result<(Matrix<R>, ErrorReport<R::Elem>)> {
    let mut work = c.clone();
    let mut report = ErrorReport::default();
    let mut remaining = k_exact;
    let mut idle = 0;
    while remaining > 0 {
        report.iterations += 1;
        let before = report.corrections.len();

        let rows = freivalds_rounds(a, b, &work, 1, bits)?;
        let cols = freivalds_rounds_cols(a, b, &work, 1, bits)?;
        if !rows.is_empty() && !cols.is_empty() {
            let a1 = a.extract_rows(&rows)?;
            let b1 = b.extract_cols(&cols)?;
            let c1 = sub(&work, &rows, &cols);
            let strips = contiguous_strips(cols.len(), ceil_sqrt(remaining));
            for (r, s) in flag_strip_rows(&a1, &b1, &c1, &strips, 1, bits)? {
                let i = rows.as_slice()[r];
                for &l in strips[s].iter() {
                    let j = cols.as_slice()[l];
                    let v = entry_of_product(a, b, i, j);
                    record(&mut work, &mut report.corrections, i, j, v, false);
                }
            }
        }

        let fixed = report.corrections.len() - before;
        remaining = remaining.saturating_sub(fixed);
        if fixed == 0 {
            idle += 1;
            if idle >= cfg.stall_rounds {
                return Err(Error::StalledTooLong { rounds: idle, remaining });
            }
        } else {
            idle = 0;
        }
    }
    Ok((work, report))
}
