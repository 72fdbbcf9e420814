//! Correction with few random bits.
//!
//! Each round draws one prime uniformly from the first `4 m` primes, where `m`
//! is the separating budget for `ceil(sqrt k)` columns, and runs a single
//! residue-strip sweep with it; then the same on the transposed problem with a
//! fresh prime. An entry in a row (or column) with few errors is isolated by a
//! random such prime with constant probability, so every round repairs a
//! constant fraction of what is left in expectation. Only the prime indices
//! are random.

use rand::RngCore;

use crate::bits::BitSource;
use crate::deterministic::{ceil_sqrt, Sweep};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::primes::{first_primes, prime_budget, PrimeList};
use crate::report::{Correction, ErrorReport};
use crate::ring::{counter, Ring};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrimeDraw {
    /// 1-based position of the prime in the list it was drawn from.
    pub prime_index: usize,
    pub prime: u64,
    pub bits: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BitBudgetLedger {
    pub bits_consumed: u64,
    pub draws: Vec<PrimeDraw>,
}

impl BitBudgetLedger {
    fn push(&mut self, draw: PrimeDraw) {
        self.bits_consumed += draw.bits;
        self.draws.push(draw);
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FewBitsConfig {
    pub c_budget: f64,
    /// Rounds in a row without a genuine correction before giving up.
    pub stall_rounds: usize,
}

impl Default for FewBitsConfig {
    fn default() -> Self {
        Self {
            c_budget: 2.0,
            stall_rounds: 64,
        }
    }
}

/// Uniform choice among the first `budget_m` entries of `primes`, by
/// rejection sampling on `ceil(log2 budget_m)`-bit words.
pub fn draw_random_prime<S: RngCore>(primes: &PrimeList, budget_m: usize, bits: &mut BitSource<S>) -> PrimeDraw {
    assert!(budget_m >= 1 && budget_m <= primes.len(), "budget outside prime list");
    let before = bits.consumed();
    let idx = bits.below(budget_m as u64) as usize;
    PrimeDraw {
        prime_index: idx + 1,
        prime: primes.as_slice()[idx],
        bits: bits.consumed() - before,
    }
}

/// Repairs `C'` known to hold exactly `k_exact` wrong entries.
pub fn correct_fewbits<R: Ring, S: RngCore>(
    a: &Matrix<R>,
    b: &Matrix<R>,
    c: &Matrix<R>,
    k_exact: usize,
    bits: &mut BitSource<S>,
    cfg: &FewBitsConfig,
) -> Result<(Matrix<R>, ErrorReport<R::Elem>, BitBudgetLedger)> {
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
    let (out, mults) = counter::measure(|| run(a, b, c, k_exact, bits, cfg));
    out.map(|(m, mut report, ledger)| {
        report.ring_mults = mults;
        report.random_bits = ledger.bits_consumed;
        (m, report, ledger)
    })
}

fn run<R: Ring, S: RngCore>(
    a: &Matrix<R>,
    b: &Matrix<R>,
    c: &Matrix<R>,
    k_exact: usize,
    bits: &mut BitSource<S>,
    cfg: &FewBitsConfig,
) -> Result<(Matrix<R>, ErrorReport<R::Elem>, BitBudgetLedger)> {
    let mut work = c.clone();
    let mut report = ErrorReport::default();
    let mut ledger = BitBudgetLedger::default();
    if k_exact == 0 {
        return Ok((work, report, ledger));
    }

    let n = c.rows().max(c.cols());
    let budget = |k: usize| 4 * prime_budget(ceil_sqrt(k), n, cfg.c_budget);
    let primes = first_primes(budget(k_exact));
    let (at, bt) = (a.transpose(), b.transpose());
    let mut col_sweep = Sweep::segments(a, b);
    let mut row_sweep = Sweep::segments(&bt, &at);

    let mut remaining = k_exact;
    let mut idle = 0;
    while remaining > 0 {
        report.iterations += 1;
        let before = report.corrections.len();

        let draw = draw_random_prime(&primes, budget(remaining), bits);
        ledger.push(draw);
        col_sweep.one_prime(&mut work, draw.prime, &mut report.corrections, false)?;
        remaining = remaining.saturating_sub(report.corrections.len() - before);

        if remaining > 0 {
            let mid = report.corrections.len();
            let draw = draw_random_prime(&primes, budget(remaining), bits);
            ledger.push(draw);
            let mut work_t = work.transpose();
            let mut found: Vec<Correction<R::Elem>> = Vec::new();
            row_sweep.one_prime(&mut work_t, draw.prime, &mut found, true)?;
            for corr in &found {
                work.set_entry(corr.row, corr.col, corr.new);
            }
            report.corrections.extend(found);
            remaining = remaining.saturating_sub(report.corrections.len() - mid);
        }

        if report.corrections.len() == before {
            idle += 1;
            if idle >= cfg.stall_rounds {
                return Err(Error::StalledTooLong {
                    rounds: idle,
                    remaining,
                });
            }
        } else {
            idle = 0;
        }
    }
    Ok((work, report, ledger))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::SeededBits;
    use crate::matrix::naive_multiply;
    use crate::ring::ModPrime;

    fn instance(n: usize, k: usize, seed: u64) -> (Matrix<ModPrime>, Matrix<ModPrime>, Matrix<ModPrime>, Matrix<ModPrime>) {
        let r = ModPrime::new(1_000_003).unwrap();
        let mut bits = SeededBits::seeded(seed);
        let a = Matrix::from_fn(r, n, n, |_, _| r.random(&mut bits));
        let b = Matrix::from_fn(r, n, n, |_, _| r.random(&mut bits));
        let truth = naive_multiply(&a, &b).unwrap();
        let mut c = truth.clone();
        let mut placed = 0;
        while placed < k {
            let (i, j) = (bits.below(n as u64) as usize, bits.below(n as u64) as usize);
            if c.get(i, j) == truth.get(i, j) {
                let d = r.random_nonzero(&mut bits);
                c.set_entry(i, j, r.add(truth.get(i, j), d));
                placed += 1;
            }
        }
        (a, b, c, truth)
    }

    #[test]
    fn draw_examples() {
        let primes = first_primes(8);
        let mut bits = SeededBits::seeded(1);
        let d = draw_random_prime(&primes, 1, &mut bits);
        assert_eq!((d.prime, d.bits, d.prime_index), (2, 0, 1));

        let mut hits = [0usize; 4];
        for _ in 0..4000 {
            let d = draw_random_prime(&primes, 4, &mut bits);
            assert_eq!(d.bits, 2);
            hits[d.prime_index - 1] += 1;
        }
        assert!(hits.iter().all(|&h| (850..1150).contains(&h)), "{hits:?}");

        let before = bits.consumed();
        for _ in 0..3000 {
            let d = draw_random_prime(&primes, 3, &mut bits);
            assert!([2, 3, 5].contains(&d.prime));
        }
        let mean = (bits.consumed() - before) as f64 / 3000.0;
        assert!(mean <= 2.0 * 4.0 / 3.0 + 0.1, "mean bits {mean}");
    }

    #[test]
    fn zero_errors_is_free() {
        let (a, b, c, truth) = instance(8, 0, 3);
        let mut bits = SeededBits::seeded(0);
        let (out, report, ledger) = correct_fewbits(&a, &b, &c, 0, &mut bits, &FewBitsConfig::default()).unwrap();
        assert_eq!(out, truth);
        assert_eq!((ledger.bits_consumed, report.iterations), (0, 0));
    }

    #[test]
    fn single_error_needs_few_rounds() {
        let mut total = 0;
        for seed in 0..200 {
            let (a, b, c, truth) = instance(16, 1, seed);
            let mut bits = SeededBits::seeded(seed + 1000);
            let (out, report, _) = correct_fewbits(&a, &b, &c, 1, &mut bits, &FewBitsConfig::default()).unwrap();
            assert_eq!(out, truth);
            total += report.iterations;
        }
        assert!(total as f64 / 200.0 <= 2.0);
    }

    #[test]
    fn ledger_matches_generator_usage() {
        for seed in 0..20 {
            let (a, b, c, truth) = instance(64, 16, seed);
            let mut bits = SeededBits::seeded(seed);
            let (out, report, ledger) = correct_fewbits(&a, &b, &c, 16, &mut bits, &FewBitsConfig::default()).unwrap();
            assert_eq!(out, truth);
            assert_eq!(ledger.bits_consumed, bits.consumed());
            assert_eq!(ledger.bits_consumed, ledger.draws.iter().map(|d| d.bits).sum::<u64>());
            assert_eq!(report.corrections.len(), 16);
            // 40 (log2^2 16 + log2 16 log2 log2 64)
            assert!(ledger.bits_consumed as f64 <= 40.0 * (16.0 + 4.0 * 6f64.log2()));
        }
    }

    #[test]
    fn overstated_k_stalls() {
        let (a, b, c, _) = instance(8, 1, 9);
        let mut bits = SeededBits::seeded(9);
        let cfg = FewBitsConfig {
            stall_rounds: 5,
            ..FewBitsConfig::default()
        };
        let err = correct_fewbits(&a, &b, &c, 3, &mut bits, &cfg).unwrap_err();
        assert!(matches!(err, Error::StalledTooLong { rounds: 5, remaining: 2 }));
    }
}
