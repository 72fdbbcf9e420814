//! Small primes and residue-class strips.
//!
//! Columns are bucketed by `j mod p` on their 1-based index `j`. For a set of
//! erroneous columns, a long enough list of small primes always contains, for
//! each member, a prime whose residue class holds no other member; that class
//! then isolates the column.

use crate::matrix::ColIndexSet;

/// The first `m` primes in ascending order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeList(Vec<u64>);

impl PrimeList {
    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, u64> {
        self.0.iter()
    }

    pub fn last(&self) -> Option<u64> {
        self.0.last().copied()
    }
}

fn sieve(limit: usize) -> Vec<u64> {
    let mut composite = vec![false; limit + 1];
    let mut out = Vec::new();
    for i in 2..=limit {
        if composite[i] {
            continue;
        }
        out.push(i as u64);
        let mut j = i * i;
        while j <= limit {
            composite[j] = true;
            j += i;
        }
    }
    out
}

/// Exactly the first `m` primes (`m >= 1`; `m == 0` yields an empty list).
///
/// The sieve is sized by `m (ln m + ln ln m)`, which bounds the `m`-th prime
/// for `m >= 6`, and doubled until enough primes turn up.
pub fn first_primes(m: usize) -> PrimeList {
    if m == 0 {
        return PrimeList(Vec::new());
    }
    let mf = m as f64;
    let mut limit = if m < 6 {
        15
    } else {
        (mf * (mf.ln() + mf.ln().ln())).ceil() as usize + 1
    };
    loop {
        let mut primes = sieve(limit);
        if primes.len() >= m {
            primes.truncate(m);
            return PrimeList(primes);
        }
        limit *= 2;
    }
}

/// Number of primes needed to separate `l` indices out of `1..=n`:
/// `max(1, ceil(c * l * ln n / ln ln n))`, with `ln ln n` clamped below at 1.
pub fn prime_budget(l: usize, n: usize, c: f64) -> usize {
    let n = n.max(2) as f64;
    let lnln = n.ln().ln().max(1.0);
    let m = (c * l as f64 * n.ln() / lnln).ceil();
    if m.is_finite() && m >= 1.0 {
        m as usize
    } else {
        1
    }
}

/// One residue class `{ j : j mod p = r }` of columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidueStrip {
    pub prime: u64,
    pub residue: u64,
    /// 0-based column indices whose 1-based index is `residue` mod `prime`.
    pub members: ColIndexSet,
}

/// The `p` residue classes of columns `1..=n`, in residue order. Classes may
/// be empty when `p > n`.
pub fn residue_strips(n: usize, p: u64) -> Vec<ResidueStrip> {
    assert!(p >= 2, "strip modulus must be at least 2");
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); p as usize];
    for col in 0..n {
        buckets[((col as u64 + 1) % p) as usize].push(col);
    }
    buckets
        .into_iter()
        .enumerate()
        .map(|(r, members)| ResidueStrip {
            prime: p,
            residue: r as u64,
            members: ColIndexSet::from_sorted(members),
        })
        .collect()
}

/// Whether every index in `set` is isolated from all the others by at least
/// one prime in `primes`. Test-support oracle.
pub fn verify_separation(set: &[usize], primes: &PrimeList) -> bool {
    set.iter().enumerate().all(|(m, &im)| {
        primes.iter().any(|&p| {
            let p = p as usize;
            set.iter()
                .enumerate()
                .all(|(q, &iq)| q == m || iq % p != im % p)
        })
    })
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((u128::from(a) * u128::from(b)) % u128::from(m)) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &WITNESSES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Smallest prime strictly greater than `x`.
pub fn next_prime_above(x: u64) -> u64 {
    let mut c = x + 1;
    while !is_prime(c) {
        c += 1;
    }
    c
}
