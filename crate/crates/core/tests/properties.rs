//! Random-instance properties shared by every corrector.

use matfix::harness::{generate_instance, run_algo, Algo, Pattern, RunConfig};
use matfix::matrix::recompute_entry;
use matfix::single::correct_single_error_with;
use matfix::{naive_multiply, Matrix, ModPrime, Ring, SeededBits, Wrap64};
use proptest::prelude::*;

fn pattern() -> impl Strategy<Value = Pattern> {
    prop::sample::select(Pattern::ALL.to_vec())
}

fn check<R: Ring>(ring: R, n: usize, k: usize, seed: u64, pat: Pattern) -> Result<(), TestCaseError> {
    let inst = generate_instance(n, k, ring, seed, pat).unwrap();
    prop_assert_eq!(inst.c_err.diff_positions(&inst.c_true).len(), k);
    let cfg = RunConfig::default();
    for algo in [Algo::Det1, Algo::Det2, Algo::Fewbits, Algo::Rand, Algo::Randk, Algo::Sketch] {
        let (m, report) = run_algo(algo, &inst.a, &inst.b, &inst.c_err, Some(k), &cfg, seed).unwrap();
        prop_assert_eq!(&m, &inst.c_true, "{} {:?} seed {}", algo, pat, seed);
        for c in &report.corrections {
            prop_assert_eq!(c.new, recompute_entry(&inst.a, &inst.b, c.row, c.col).unwrap());
            prop_assert_eq!(c.old, inst.c_err.get(c.row, c.col));
            prop_assert!(c.old != c.new);
        }
        if algo.is_deterministic() {
            prop_assert_eq!(report.random_bits, 0);
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn correctors_match_product_mod_prime(n in 2usize..20, frac in 0.0f64..0.4, seed: u64, pat in pattern()) {
        let k = ((n * n) as f64 * frac) as usize;
        check(ModPrime::new(1_000_003).unwrap(), n, k, seed, pat)?;
    }

    #[test]
    fn correctors_match_product_wrapping(n in 2usize..20, frac in 0.0f64..0.4, seed: u64, pat in pattern()) {
        let k = ((n * n) as f64 * frac) as usize;
        check(Wrap64::default(), n, k, seed, pat)?;
    }

    #[test]
    fn single_error_any_shape(p in 1usize..24, q in 1usize..24, r in 1usize..24, seed: u64) {
        let ring = ModPrime::new(65_537).unwrap();
        let mut bits = SeededBits::seeded(seed);
        let a = Matrix::from_fn(ring, p, q, |_, _| ring.random(&mut bits));
        let b = Matrix::from_fn(ring, q, r, |_, _| ring.random(&mut bits));
        let truth = naive_multiply(&a, &b).unwrap();
        let mut c = truth.clone();
        let (i, j) = (bits.below(p as u64) as usize, bits.below(r as u64) as usize);
        c.set_entry(i, j, ring.add(truth.get(i, j), ring.random_nonzero(&mut bits)));
        for whole_row in [false, true] {
            let cfg = matfix::single::SingleConfig { recompute_whole_row: whole_row };
            let (m, corr, report) = correct_single_error_with(&a, &b, &c, cfg).unwrap();
            prop_assert_eq!(&m, &truth);
            prop_assert_eq!((corr.row, corr.col), (i, j));
            prop_assert_eq!(report.random_bits, 0);
            if !whole_row {
                prop_assert!(report.ring_mults <= 4 * (p * q + q * r + p * r) as u64);
            }
        }
    }

    #[test]
    fn runs_are_reproducible(n in 2usize..12, k in 0usize..10, seed: u64, algo in prop::sample::select(vec![Algo::Fewbits, Algo::Rand, Algo::Randk, Algo::Sketch])) {
        let k = k.min(n * n);
        let inst = generate_instance(n, k, Wrap64::default(), seed, Pattern::UniformCells).unwrap();
        let cfg = RunConfig::default();
        let one = run_algo(algo, &inst.a, &inst.b, &inst.c_err, Some(k), &cfg, seed).unwrap();
        let two = run_algo(algo, &inst.a, &inst.b, &inst.c_err, Some(k), &cfg, seed).unwrap();
        prop_assert_eq!(one, two);
    }
}
