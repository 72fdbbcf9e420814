//! Exact commutative rings.
//!
//! Every equality test in the correctors is decided here, so the arithmetic is
//! exact: residues modulo a prime, or machine integers with wrapping
//! overflow (a ring with zero divisors). Floating point is deliberately absent.

use std::fmt::Debug;
use std::hash::Hash;
use std::marker::PhantomData;

use num_traits::{AsPrimitive, PrimInt, Unsigned, WrappingAdd, WrappingMul, WrappingNeg};
use rand::RngCore;

use crate::bits::BitSource;
use crate::error::{Error, Result};

/// A commutative ring with canonical element representation.
///
/// The ring value itself is the context (modulus, width); elements are plain
/// `Copy` values whose equality is ring equality.
pub trait Ring: Copy + Debug + PartialEq + Send + Sync + 'static {
    type Elem: Copy + Eq + Hash + Debug + Send + Sync + 'static;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem;
    fn neg(&self, a: Self::Elem) -> Self::Elem;
    fn mul(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem;

    fn sub(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem {
        self.add(a, self.neg(b))
    }

    /// Reduces an arbitrary integer into canonical form.
    fn from_u64(&self, v: u64) -> Self::Elem;
    fn to_u64(&self, a: Self::Elem) -> u64;
    /// Whether `v` is already a canonical representative.
    fn is_canonical(&self, v: u64) -> bool;
    /// Number of elements, `2^bits` for wrapping rings.
    fn order(&self) -> u128;

    fn random<R: RngCore>(&self, bits: &mut BitSource<R>) -> Self::Elem;

    fn random_nonzero<R: RngCore>(&self, bits: &mut BitSource<R>) -> Self::Elem {
        loop {
            let x = self.random(bits);
            if x != self.zero() {
                return x;
            }
        }
    }
}

/// Integers modulo a prime `q < 2^64`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ModPrime {
    q: u64,
}

impl ModPrime {
    /// `q` must be at least 2. Primality is the caller's business; the
    /// algorithms only need a commutative ring, a prime just makes it a field.
    pub fn new(q: u64) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidModulus(q));
        }
        Ok(Self { q })
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }
}

impl Ring for ModPrime {
    type Elem = u64;

    #[inline]
    fn zero(&self) -> u64 {
        0
    }

    #[inline]
    fn one(&self) -> u64 {
        1
    }

    #[inline]
    fn add(&self, a: u64, b: u64) -> u64 {
        let (s, carry) = a.overflowing_add(b);
        if carry || s >= self.q {
            s.wrapping_sub(self.q)
        } else {
            s
        }
    }

    #[inline]
    fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.q - a
        }
    }

    #[inline]
    fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a.wrapping_sub(b).wrapping_add(self.q)
        }
    }

    #[inline]
    fn mul(&self, a: u64, b: u64) -> u64 {
        if self.q <= 1 << 32 {
            // both operands < 2^32, product fits a word
            (a * b) % self.q
        } else {
            ((u128::from(a) * u128::from(b)) % u128::from(self.q)) as u64
        }
    }

    fn from_u64(&self, v: u64) -> u64 {
        v % self.q
    }

    fn to_u64(&self, a: u64) -> u64 {
        a
    }

    fn is_canonical(&self, v: u64) -> bool {
        v < self.q
    }

    fn order(&self) -> u128 {
        u128::from(self.q)
    }

    fn random<R: RngCore>(&self, bits: &mut BitSource<R>) -> u64 {
        bits.below(self.q)
    }
}

/// Unsigned machine integers with wrapping arithmetic, i.e. `Z / 2^BITS`.
pub struct WrapRing<T>(PhantomData<T>);

impl<T> WrapRing<T> {
    pub const fn new() -> Self {
        Self(PhantomData)
    }
}

impl<T> Default for WrapRing<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T> Clone for WrapRing<T> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<T> Copy for WrapRing<T> {}

impl<T> PartialEq for WrapRing<T> {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl<T> Debug for WrapRing<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Wrap{}", std::mem::size_of::<T>() * 8)
    }
}

impl<T> Ring for WrapRing<T>
where
    T: PrimInt
        + Unsigned
        + WrappingAdd
        + WrappingMul
        + WrappingNeg
        + AsPrimitive<u64>
        + Hash
        + Debug
        + Send
        + Sync
        + 'static,
    u64: AsPrimitive<T>,
{
    type Elem = T;

    #[inline]
    fn zero(&self) -> T {
        T::zero()
    }

    #[inline]
    fn one(&self) -> T {
        T::one()
    }

    #[inline]
    fn add(&self, a: T, b: T) -> T {
        a.wrapping_add(&b)
    }

    #[inline]
    fn neg(&self, a: T) -> T {
        a.wrapping_neg()
    }

    #[inline]
    fn mul(&self, a: T, b: T) -> T {
        a.wrapping_mul(&b)
    }

    fn from_u64(&self, v: u64) -> T {
        v.as_()
    }

    fn to_u64(&self, a: T) -> u64 {
        a.as_()
    }

    fn is_canonical(&self, v: u64) -> bool {
        let width = T::zero().count_zeros();
        width >= 64 || v >> width == 0
    }

    fn order(&self) -> u128 {
        1u128 << T::zero().count_zeros()
    }

    fn random<R: RngCore>(&self, bits: &mut BitSource<R>) -> T {
        bits.bits(T::zero().count_zeros()).as_()
    }
}

pub type Wrap64 = WrapRing<u64>;
pub type Wrap32 = WrapRing<u32>;

/// A ring chosen at run time, as read from a matrix file header.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RingContext {
    ModPrime(ModPrime),
    Wrap64,
}

impl RingContext {
    /// Header convention: modulus 0 selects `Z / 2^64`.
    pub fn from_modulus(modulus: u64) -> Result<Self> {
        if modulus == 0 {
            Ok(RingContext::Wrap64)
        } else {
            ModPrime::new(modulus).map(RingContext::ModPrime)
        }
    }

    pub fn file_modulus(&self) -> u64 {
        match self {
            RingContext::ModPrime(m) => m.modulus(),
            RingContext::Wrap64 => 0,
        }
    }
}

const W64: Wrap64 = WrapRing::new();

impl Ring for RingContext {
    type Elem = u64;

    #[inline]
    fn zero(&self) -> u64 {
        0
    }

    #[inline]
    fn one(&self) -> u64 {
        1
    }

    #[inline]
    fn add(&self, a: u64, b: u64) -> u64 {
        match self {
            RingContext::ModPrime(m) => m.add(a, b),
            RingContext::Wrap64 => W64.add(a, b),
        }
    }

    #[inline]
    fn neg(&self, a: u64) -> u64 {
        match self {
            RingContext::ModPrime(m) => m.neg(a),
            RingContext::Wrap64 => W64.neg(a),
        }
    }

    #[inline]
    fn sub(&self, a: u64, b: u64) -> u64 {
        match self {
            RingContext::ModPrime(m) => m.sub(a, b),
            RingContext::Wrap64 => a.wrapping_sub(b),
        }
    }

    #[inline]
    fn mul(&self, a: u64, b: u64) -> u64 {
        match self {
            RingContext::ModPrime(m) => m.mul(a, b),
            RingContext::Wrap64 => W64.mul(a, b),
        }
    }

    fn from_u64(&self, v: u64) -> u64 {
        match self {
            RingContext::ModPrime(m) => m.from_u64(v),
            RingContext::Wrap64 => v,
        }
    }

    fn to_u64(&self, a: u64) -> u64 {
        a
    }

    fn is_canonical(&self, v: u64) -> bool {
        match self {
            RingContext::ModPrime(m) => m.is_canonical(v),
            RingContext::Wrap64 => true,
        }
    }

    fn order(&self) -> u128 {
        match self {
            RingContext::ModPrime(m) => m.order(),
            RingContext::Wrap64 => W64.order(),
        }
    }

    fn random<R: RngCore>(&self, bits: &mut BitSource<R>) -> u64 {
        match self {
            RingContext::ModPrime(m) => m.random(bits),
            RingContext::Wrap64 => W64.random(bits),
        }
    }
}

/// Dot product `sum a_i * b_i`; charges `len(a)` multiplications.
pub fn dot<R: Ring>(ring: &R, a: &[R::Elem], b: &[R::Elem]) -> Result<R::Elem> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(dot_unchecked(ring, a, b))
}

#[inline]
pub(crate) fn dot_unchecked<R: Ring>(ring: &R, a: &[R::Elem], b: &[R::Elem]) -> R::Elem {
    counter::charge(a.len() as u64);
    a.iter()
        .zip(b)
        .fold(ring.zero(), |acc, (&x, &y)| ring.add(acc, ring.mul(x, y)))
}

/// Instrumentation of ring multiplications.
///
/// Counts are kept per thread, so a computation that runs on one thread reads
/// an exact figure from [`count`]. Every charge is also folded into a
/// process-wide total ([`global_count`]), which is an upper bound for any
/// single computation when several threads are busy.
pub mod counter {
    use std::cell::Cell;
    use std::sync::atomic::{AtomicU64, Ordering};

    static GLOBAL: AtomicU64 = AtomicU64::new(0);

    thread_local! {
        static LOCAL: Cell<u64> = const { Cell::new(0) };
    }

    #[inline]
    pub fn charge(mults: u64) {
        if mults == 0 {
            return;
        }
        LOCAL.with(|c| c.set(c.get() + mults));
        GLOBAL.fetch_add(mults, Ordering::Relaxed);
    }

    /// Multiplications charged on the current thread since its last reset.
    pub fn count() -> u64 {
        LOCAL.with(Cell::get)
    }

    pub fn reset() {
        LOCAL.with(|c| c.set(0));
    }

    pub fn global_count() -> u64 {
        GLOBAL.load(Ordering::Relaxed)
    }

    pub fn reset_global() {
        GLOBAL.store(0, Ordering::Relaxed);
    }

    /// Runs `f` and returns its result together with the multiplications it
    /// charged on this thread. Nested measurements compose.
    pub fn measure<T>(f: impl FnOnce() -> T) -> (T, u64) {
        let before = count();
        let out = f();
        (out, count() - before)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::SeededBits;
    use num_bigint::BigUint;
    use proptest::prelude::*;

    fn m7() -> ModPrime {
        ModPrime::new(7).unwrap()
    }

    #[test]
    fn modprime_small_identities() {
        let r = m7();
        assert_eq!(r.add(5, 4), 2);
        for x in 0..7 {
            assert_eq!(r.add(x, 0), x);
        }
        assert_eq!(r.mul(3, 5), 1);
        assert_eq!(r.neg(3), 4);
        assert_eq!(r.sub(2, 5), 4);
    }

    #[test]
    fn wrap64_overflow() {
        let r = Wrap64::new();
        assert_eq!(r.add(u64::MAX, 1), 0);
        assert_eq!(r.mul(1 << 32, 1 << 32), 0);
        assert_eq!(r.neg(1), u64::MAX);
    }

    #[test]
    fn wrap32_truncates() {
        let r = Wrap32::new();
        assert_eq!(r.from_u64(u64::from(u32::MAX) + 6), 5);
        assert!(r.is_canonical(u64::from(u32::MAX)));
        assert!(!r.is_canonical(1 << 32));
        assert_eq!(r.order(), 1 << 32);
    }

    #[test]
    fn rejects_tiny_modulus() {
        assert!(matches!(ModPrime::new(1), Err(Error::InvalidModulus(1))));
        assert!(RingContext::from_modulus(0).is_ok());
    }

    #[test]
    fn large_modulus_uses_wide_product() {
        let q = (1u64 << 61) - 1;
        let r = ModPrime::new(q).unwrap();
        let a = q - 1;
        // (-1)^2 = 1
        assert_eq!(r.mul(a, a), 1);
        assert_eq!(r.add(a, a), q - 2);
    }

    #[test]
    fn dot_examples() {
        let r = m7();
        assert_eq!(dot(&r, &[1, 2], &[3, 4]).unwrap(), 4);
        assert_eq!(dot(&r, &[3, 1, 6], &[0, 0, 0]).unwrap(), 0);
        let r5 = ModPrime::new(5).unwrap();
        assert_eq!(dot(&r5, &[1, 1, 1], &[2, 3, 4]).unwrap(), 4);
        assert!(matches!(
            dot(&r, &[1], &[1, 2]),
            Err(Error::LengthMismatch { left: 1, right: 2 })
        ));
    }

    #[test]
    fn dot_charges_its_length() {
        let r = m7();
        let (_, mults) = counter::measure(|| dot(&r, &[1, 2, 3], &[4, 5, 6]).unwrap());
        assert_eq!(mults, 3);
    }

    #[test]
    fn runtime_context_matches_static_rings() {
        let ctx = RingContext::from_modulus(7).unwrap();
        let r = m7();
        for a in 0..7 {
            for b in 0..7 {
                assert_eq!(ctx.add(a, b), r.add(a, b));
                assert_eq!(ctx.mul(a, b), r.mul(a, b));
                assert_eq!(ctx.sub(a, b), r.sub(a, b));
            }
        }
        let w = RingContext::Wrap64;
        assert_eq!(w.sub(0, 1), u64::MAX);
    }

    #[test]
    fn random_elements_are_canonical() {
        let mut bits = SeededBits::seeded(9);
        let r = m7();
        for _ in 0..1000 {
            let x = r.random_nonzero(&mut bits);
            assert!(r.is_canonical(x) && x != 0);
        }
    }

    fn axioms<R: Ring>(r: R, a: R::Elem, b: R::Elem, c: R::Elem) {
        assert_eq!(r.add(r.add(a, b), c), r.add(a, r.add(b, c)));
        assert_eq!(r.mul(r.mul(a, b), c), r.mul(a, r.mul(b, c)));
        assert_eq!(r.add(a, b), r.add(b, a));
        assert_eq!(r.mul(a, b), r.mul(b, a));
        assert_eq!(r.mul(a, r.add(b, c)), r.add(r.mul(a, b), r.mul(a, c)));
        assert_eq!(r.add(a, r.neg(a)), r.zero());
        assert_eq!(r.mul(a, r.one()), a);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn modprime_axioms(q in 2u64..u64::MAX, a: u64, b: u64, c: u64) {
            let r = ModPrime::new(q).unwrap();
            axioms(r, a % q, b % q, c % q);
        }

        #[test]
        fn wrap64_axioms(a: u64, b: u64, c: u64) {
            axioms(Wrap64::new(), a, b, c);
        }

        #[test]
        fn wrap32_axioms(a: u32, b: u32, c: u32) {
            axioms(Wrap32::new(), a, b, c);
        }
    }

    proptest! {
        #[test]
        fn dot_matches_bigint_reference(
            q in 2u64..u64::MAX,
            pairs in proptest::collection::vec((any::<u64>(), any::<u64>()), 0..40),
        ) {
            let r = ModPrime::new(q).unwrap();
            let a: Vec<u64> = pairs.iter().map(|p| p.0 % q).collect();
            let b: Vec<u64> = pairs.iter().map(|p| p.1 % q).collect();
            let mut acc = BigUint::from(0u32);
            for (x, y) in a.iter().zip(&b) {
                acc += BigUint::from(*x) * BigUint::from(*y);
            }
            let expect: u64 = (acc % BigUint::from(q)).try_into().unwrap();
            prop_assert_eq!(dot(&r, &a, &b).unwrap(), expect);
        }
    }
}
