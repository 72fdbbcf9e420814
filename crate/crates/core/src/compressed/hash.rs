//! Affine hash pairs `x -> ((a x + b) mod P) mod s + 1`.

use rand::RngCore;

use crate::bits::BitSource;
use crate::error::{Error, Result};
use crate::primes::next_prime_above;

/// A row hash `g` and a column hash `h`, both into `1..=s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HashPair {
    pub a_g: u64,
    pub b_g: u64,
    pub a_h: u64,
    pub b_h: u64,
    pub p: u64,
    pub s: usize,
}

impl HashPair {
    fn eval(&self, a: u64, b: u64, x: u64) -> usize {
        let v = (u128::from(a) * u128::from(x) + u128::from(b)) % u128::from(self.p);
        (v % self.s as u128) as usize + 1
    }

    /// `g(x)` for a 1-based index `x`.
    pub fn g(&self, x: usize) -> usize {
        self.eval(self.a_g, self.b_g, x as u64)
    }

    pub fn h(&self, x: usize) -> usize {
        self.eval(self.a_h, self.b_h, x as u64)
    }

    /// `g(i + 1) - 1` for every 0-based row `i < n`.
    pub(crate) fn g_table(&self, n: usize) -> Vec<usize> {
        (1..=n).map(|x| self.g(x) - 1).collect()
    }

    pub(crate) fn h_table(&self, n: usize) -> Vec<usize> {
        (1..=n).map(|x| self.h(x) - 1).collect()
    }
}

/// The prime modulus used for domain size `n` and range `s`: the least prime
/// above `n s^2`.
pub fn hash_modulus(n: usize, s: usize) -> Result<u64> {
    let bound = (n.max(1) as u128) * (s as u128) * (s as u128);
    if bound >= 1 << 62 {
        return Err(Error::HashRangeTooLarge { n, s });
    }
    Ok(next_prime_above(bound as u64))
}

/// `t` independent pairs with fresh parameters; `a` is nonzero, `b` arbitrary.
pub fn sample_hash_pairs<S: RngCore>(t: usize, s: usize, n: usize, bits: &mut BitSource<S>) -> Result<Vec<HashPair>> {
    assert!(s >= 1, "hash range must be nonempty");
    let p = hash_modulus(n, s)?;
    Ok((0..t)
        .map(|_| HashPair {
            a_g: 1 + bits.below(p - 1),
            b_g: bits.below(p),
            a_h: 1 + bits.below(p - 1),
            b_h: bits.below(p),
            p,
            s,
        })
        .collect())
}
