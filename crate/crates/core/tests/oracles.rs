//! Library results checked against a big-integer reference written here,
//! plus small hand-worked instances.

use matfix::deterministic::{correct_deterministic, DetConfig, DetMode};
use matfix::harness::{generate_instance, Pattern};
use matfix::matrix::{mat_vec, recompute_entry};
use matfix::primes::{first_primes, prime_budget, residue_strips, verify_separation};
use matfix::single::correct_single_error;
use matfix::{naive_multiply, Matrix, ModMatrix, ModPrime, Ring, WrapMatrix, Wrap64};
use num_bigint::BigUint;

/// Row-major product of two `u64` matrices reduced modulo `m`, in exact
/// big-integer arithmetic.
fn big_product(a: &[u64], b: &[u64], p: usize, q: usize, r: usize, m: &BigUint) -> Vec<u64> {
    let mut out = Vec::with_capacity(p * r);
    for i in 0..p {
        for j in 0..r {
            let mut acc = BigUint::from(0u32);
            for l in 0..q {
                acc += BigUint::from(a[i * q + l]) * BigUint::from(b[l * r + j]);
            }
            let v = acc % m;
            out.push(v.iter_u64_digits().next().unwrap_or(0));
        }
    }
    out
}

fn rows(m: &ModMatrix) -> Vec<Vec<u64>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

#[test]
fn two_by_two_over_101() {
    let r = ModPrime::new(101).unwrap();
    let a = Matrix::from_u64_rows(r, &[vec![1, 2], vec![3, 4]]).unwrap();
    let b = Matrix::from_u64_rows(r, &[vec![5, 6], vec![7, 8]]).unwrap();
    let c = naive_multiply(&a, &b).unwrap();
    assert_eq!(rows(&c), vec![vec![19, 22], vec![43, 50]]);
    assert_eq!(recompute_entry(&a, &b, 0, 0).unwrap(), 19);
    let oracle = big_product(&[1, 2, 3, 4], &[5, 6, 7, 8], 2, 2, 2, &BigUint::from(101u32));
    assert_eq!(c.as_slice(), oracle.as_slice());
}

#[test]
fn row_sums_mod_seven() {
    let r = ModPrime::new(7).unwrap();
    let m = Matrix::from_u64_rows(r, &[vec![1, 2], vec![3, 4]]).unwrap();
    assert_eq!(mat_vec(&m, &[1, 1]).unwrap(), vec![3, 0]);
}

#[test]
fn naive_product_matches_big_integers() {
    let q = 2_147_483_647u64;
    let big_q = BigUint::from(q);
    let big_w = BigUint::from(1u32) << 64;
    for seed in 0..20u64 {
        let n = 1 + (seed as usize * 7) % 13;
        let inst = generate_instance(n, 0, ModPrime::new(q).unwrap(), seed, Pattern::UniformCells).unwrap();
        let want = big_product(inst.a.as_slice(), inst.b.as_slice(), n, n, n, &big_q);
        assert_eq!(inst.c_true.as_slice(), want.as_slice(), "mod q, n={n}");

        let inst = generate_instance(n, 0, Wrap64::default(), seed, Pattern::UniformCells).unwrap();
        let want = big_product(inst.a.as_slice(), inst.b.as_slice(), n, n, n, &big_w);
        assert_eq!(inst.c_true.as_slice(), want.as_slice(), "wrapping, n={n}");
    }
}

#[test]
fn primes_against_trial_division() {
    let ps = first_primes(100);
    let mut want = Vec::new();
    let mut x = 2u64;
    while want.len() < 100 {
        if (2..x).take_while(|d| d * d <= x).all(|d| !x.is_multiple_of(d)) {
            want.push(x);
        }
        x += 1;
    }
    assert_eq!(ps.as_slice(), want.as_slice());
    assert_eq!(ps.last(), Some(541));
}

#[test]
fn budget_frozen_value() {
    // ceil(2 * 4 * ln 256 / ln ln 256) = ceil(25.90) = 26
    assert_eq!(prime_budget(4, 256, 2.0), 26);
    assert_eq!(prime_budget(1, 2, 1.0), 1);
}

#[test]
fn separation_by_enumeration() {
    // brute force: each member has a prime giving it a private residue
    let brute = |set: &[usize], primes: &[u64]| {
        set.len() <= 1
            || set.iter().all(|&x| {
                primes
                    .iter()
                    .any(|&p| set.iter().filter(|&&y| (y as u64) % p == (x as u64) % p).count() == 1)
            })
    };
    let primes = first_primes(6);
    for mask in 0u32..(1 << 10) {
        let set: Vec<usize> = (1..=10).filter(|&i| mask & (1 << (i - 1)) != 0).collect();
        for m in 1..=6 {
            let list = first_primes(m);
            assert_eq!(
                verify_separation(&set, &list),
                brute(&set, &primes.as_slice()[..m]),
                "{set:?} with {m} primes"
            );
        }
    }
    assert!(verify_separation(&[3, 7], &first_primes(2)));
    assert!(!verify_separation(&[1, 3], &first_primes(1)));
}

#[test]
fn residue_strips_six() {
    let s = residue_strips(6, 2);
    let members: Vec<Vec<usize>> = s.iter().map(|x| x.members.iter().map(|j| j + 1).collect()).collect();
    assert_eq!(members, vec![vec![2, 4, 6], vec![1, 3, 5]]);
    let s = residue_strips(6, 7);
    assert_eq!(s.len(), 7);
    assert_eq!(s.iter().filter(|x| x.members.is_empty()).count(), 1);
}

#[test]
fn single_error_corner() {
    let r = ModPrime::new(101).unwrap();
    let a = Matrix::from_u64_rows(r, &[vec![1, 2], vec![3, 4]]).unwrap();
    let b = Matrix::from_u64_rows(r, &[vec![5, 6], vec![7, 8]]).unwrap();
    let c = Matrix::from_u64_rows(r, &[vec![20, 22], vec![43, 50]]).unwrap();
    let (fixed, corr) = correct_single_error(&a, &b, &c).unwrap();
    assert_eq!((corr.row, corr.col, corr.old, corr.new), (0, 0, 20, 19));
    assert_eq!(rows(&fixed), vec![vec![19, 22], vec![43, 50]]);
}

#[test]
fn det_correctors_agree_with_big_integer_product() {
    let w = BigUint::from(1u32) << 64;
    for seed in 0..10u64 {
        for pattern in Pattern::ALL {
            let inst = generate_instance(16, 6, Wrap64::default(), seed, pattern).unwrap();
            let want = big_product(inst.a.as_slice(), inst.b.as_slice(), 16, 16, 16, &w);
            for mode in [DetMode::SinglePass, DetMode::TwoPass] {
                let (m, report): (WrapMatrix, _) =
                    correct_deterministic(&inst.a, &inst.b, &inst.c_err, &DetConfig::new(6, mode)).unwrap();
                assert_eq!(m.as_slice(), want.as_slice(), "{pattern:?} {mode:?} seed {seed}");
                assert_eq!(report.random_bits, 0);
            }
        }
    }
}

#[test]
fn wrapping_ring_frozen_values() {
    let r = Wrap64::default();
    assert_eq!(r.add(u64::MAX, 1), 0);
    assert_eq!(r.mul(1 << 32, 1 << 32), 0);
    let r = ModPrime::new(7).unwrap();
    assert_eq!((r.add(5, 4), r.mul(3, 5), r.neg(3)), (2, 1, 4));
}
