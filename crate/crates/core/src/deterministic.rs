//! Deterministic correction of up to `k` wrong entries.
//!
//! For each of the first few primes `p`, the columns of `C'` are bucketed by
//! residue mod `p` and every bucket is checked with its indicator vector. A
//! row is flagged whenever its errors inside the bucket do not cancel, which
//! is certain once the bucket holds a single erroneous column of that row.
//! With enough primes every erroneous column ends up alone in some bucket.
//!
//! [`DetMode::SinglePass`] uses a prime budget linear in `k` and repairs only
//! the flagged row segment inside the bucket. [`DetMode::TwoPass`] uses a
//! budget linear in `sqrt k`, repairs whole rows, then repeats the sweep on the
//! transposed problem `(B^T, A^T, C''^T)`. Every row with at most `sqrt k`
//! errors is repaired in the first pass, and what survives has at most
//! `sqrt k` errors per column, which the second pass repairs.

use crate::error::{Error, Result};
use crate::matrix::{entry_of_product, recompute_row, Matrix};
use crate::primes::{first_primes, prime_budget, residue_strips};
use crate::report::{Correction, ErrorReport};
use crate::ring::{counter, Ring};
use crate::verifier::{default_rounds, test_strip_deterministic, verify_product_public};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DetMode {
    SinglePass,
    TwoPass,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetConfig {
    /// Upper bound on the number of wrong entries.
    pub k: usize,
    /// Constant in the prime budget `c * l * ln n / ln ln n`.
    pub c_budget: f64,
    pub mode: DetMode,
    /// Stop as soon as `k` genuine corrections were made and the result
    /// passes the public-vector check.
    pub early_exit: bool,
}

impl DetConfig {
    pub fn new(k: usize, mode: DetMode) -> Self {
        Self {
            k: k.max(1),
            c_budget: 2.0,
            mode,
            early_exit: true,
        }
    }

    pub fn with_early_exit(mut self, on: bool) -> Self {
        self.early_exit = on;
        self
    }
}

/// Runs the corrector selected by `cfg.mode`.
pub fn correct_deterministic<R: Ring>(
    a: &Matrix<R>,
    b: &Matrix<R>,
    c: &Matrix<R>,
    cfg: &DetConfig,
) -> Result<(Matrix<R>, ErrorReport<R::Elem>)> {
    match cfg.mode {
        DetMode::SinglePass => correct_det_singlepass(a, b, c, cfg),
        DetMode::TwoPass => correct_det_twopass(a, b, c, cfg),
    }
}

/// Residue-strip sweep over the first `prime_budget(k, n, c)` primes,
/// repairing flagged strip-row segments.
pub fn correct_det_singlepass<R: Ring>(
    a: &Matrix<R>,
    b: &Matrix<R>,
    c: &Matrix<R>,
    cfg: &DetConfig,
) -> Result<(Matrix<R>, ErrorReport<R::Elem>)> {
    check_square_product(a, b, c)?;
    let (out, mults) = counter::measure(|| {
        let mut work = c.clone();
        let mut ledger = Vec::new();
        let primes = first_primes(prime_budget(cfg.k, c.cols(), cfg.c_budget));
        let mut sweep = Sweep::new(a, b, Repair::Segment, cfg);
        let done = sweep.run(&mut work, primes.as_slice(), &mut ledger, false)?;
        finish(a, b, work, ledger, done, cfg)
    });
    out.map(|(m, mut report)| {
        report.ring_mults = mults;
        (m, report)
    })
}

/// Row pass then column pass, each over the first `prime_budget(ceil(sqrt k),
/// n, c)` primes, repairing whole flagged rows (columns in the second pass).
pub fn correct_det_twopass<R: Ring>(
    a: &Matrix<R>,
    b: &Matrix<R>,
    c: &Matrix<R>,
    cfg: &DetConfig,
) -> Result<(Matrix<R>, ErrorReport<R::Elem>)> {
    check_square_product(a, b, c)?;
    let (out, mults) = counter::measure(|| {
        let root_k = ceil_sqrt(cfg.k);
        let mut ledger = Vec::new();

        let mut work = c.clone();
        let primes = first_primes(prime_budget(root_k, c.cols(), cfg.c_budget));
        let mut rows_pass = Sweep::new(a, b, Repair::WholeRow, cfg);
        if rows_pass.run(&mut work, primes.as_slice(), &mut ledger, false)? {
            return finish(a, b, work, ledger, true, cfg);
        }

        let (at, bt) = (a.transpose(), b.transpose());
        let mut work_t = work.transpose();
        let primes = first_primes(prime_budget(root_k, c.rows(), cfg.c_budget));
        let mut cols_pass = Sweep::new(&bt, &at, Repair::WholeRow, cfg);
        let done = cols_pass.run(&mut work_t, primes.as_slice(), &mut ledger, true)?;
        finish(a, b, work_t.transpose(), ledger, done, cfg)
    });
    out.map(|(m, mut report)| {
        report.ring_mults = mults;
        (m, report)
    })
}

fn check_square_product<R: Ring>(a: &Matrix<R>, b: &Matrix<R>, c: &Matrix<R>) -> Result<()> {
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
    Ok(())
}

pub(crate) fn ceil_sqrt(k: usize) -> usize {
    let mut r = (k as f64).sqrt() as usize;
    while r * r < k {
        r += 1;
    }
    while r > 0 && (r - 1) * (r - 1) >= k {
        r -= 1;
    }
    r
}

fn finish<R: Ring>(
    a: &Matrix<R>,
    b: &Matrix<R>,
    work: Matrix<R>,
    corrections: Vec<Correction<R::Elem>>,
    verified: bool,
    cfg: &DetConfig,
) -> Result<(Matrix<R>, ErrorReport<R::Elem>)> {
    if !verified && !verify_product_public(a, b, &work, default_rounds(3, work.rows().max(work.cols())))? {
        return Err(Error::BudgetExceeded { k: cfg.k });
    }
    let report = ErrorReport {
        corrections,
        iterations: 1,
        ..ErrorReport::default()
    };
    Ok((work, report))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Repair {
    /// Recompute the flagged row only inside the flagged strip.
    Segment,
    /// Recompute the whole flagged row, once per pass.
    WholeRow,
}

/// One sweep of residue-strip tests over a list of primes.
pub(crate) struct Sweep<'a, R: Ring> {
    a: &'a Matrix<R>,
    b: &'a Matrix<R>,
    repair: Repair,
    k: usize,
    early_exit: bool,
    /// Cells already recomputed (segment mode) or rows already recomputed
    /// (whole-row mode); recomputed values are exact, so never redo them.
    done_cells: Vec<bool>,
    done_rows: Vec<bool>,
}

impl<'a, R: Ring> Sweep<'a, R> {
    fn new(a: &'a Matrix<R>, b: &'a Matrix<R>, repair: Repair, cfg: &DetConfig) -> Self {
        Self {
            a,
            b,
            repair,
            k: cfg.k,
            early_exit: cfg.early_exit,
            done_cells: vec![false; a.rows() * b.cols()],
            done_rows: vec![false; a.rows()],
        }
    }

    /// Segment-repair sweep with no early exit, for callers that drive the
    /// primes themselves.
    pub(crate) fn segments(a: &'a Matrix<R>, b: &'a Matrix<R>) -> Self {
        Self {
            a,
            b,
            repair: Repair::Segment,
            k: usize::MAX,
            early_exit: false,
            done_cells: vec![false; a.rows() * b.cols()],
            done_rows: vec![false; a.rows()],
        }
    }

    /// Returns `true` if the sweep stopped early on a verified result.
    fn run(
        &mut self,
        work: &mut Matrix<R>,
        primes: &[u64],
        ledger: &mut Vec<Correction<R::Elem>>,
        transposed: bool,
    ) -> Result<bool> {
        for &p in primes {
            self.one_prime(work, p, ledger, transposed)?;
            if self.early_exit && ledger.len() >= self.k {
                let rounds = default_rounds(3, work.rows().max(work.cols()));
                if verify_product_public(self.a, self.b, work, rounds)? {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }

    pub(crate) fn one_prime(
        &mut self,
        work: &mut Matrix<R>,
        p: u64,
        ledger: &mut Vec<Correction<R::Elem>>,
        transposed: bool,
    ) -> Result<()> {
        for strip in residue_strips(work.cols(), p) {
            if strip.members.is_empty() {
                continue;
            }
            let flagged = test_strip_deterministic(self.a, self.b, work, &strip.members)?;
            for &i in flagged.iter() {
                match self.repair {
                    Repair::Segment => {
                        for &j in strip.members.iter() {
                            let cell = i * work.cols() + j;
                            if self.done_cells[cell] {
                                continue;
                            }
                            self.done_cells[cell] = true;
                            let v = entry_of_product(self.a, self.b, i, j);
                            record(work, ledger, i, j, v, transposed);
                        }
                    }
                    Repair::WholeRow => {
                        if self.done_rows[i] {
                            continue;
                        }
                        self.done_rows[i] = true;
                        let row = recompute_row(self.a, self.b, i)?;
                        for (j, v) in row.into_iter().enumerate() {
                            record(work, ledger, i, j, v, transposed);
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Writes `v` into `work[i][j]`, logging it if the value actually changes.
/// In a transposed sweep the logged coordinates are swapped back.
pub(crate) fn record<R: Ring>(
    work: &mut Matrix<R>,
    ledger: &mut Vec<Correction<R::Elem>>,
    i: usize,
    j: usize,
    v: R::Elem,
    transposed: bool,
) -> bool {
    let old = work.get(i, j);
    if old == v {
        return false;
    }
    work.set_entry(i, j, v);
    let (row, col) = if transposed { (j, i) } else { (i, j) };
    ledger.push(Correction { row, col, old, new: v });
    true
}
