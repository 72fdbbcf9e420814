//! Dense polynomial products over a ring.

use crate::ring::{counter, Ring};

/// Below this length Karatsuba falls back to the schoolbook product.
pub const KARATSUBA_CUTOFF: usize = 32;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PolyBackend {
    Schoolbook,
    #[default]
    Karatsuba,
}

/// Product of `p` and `q` (coefficient index = exponent). Empty if either is.
pub fn poly_multiply<R: Ring>(ring: &R, p: &[R::Elem], q: &[R::Elem], backend: PolyBackend) -> Vec<R::Elem> {
    match backend {
        PolyBackend::Schoolbook => schoolbook(ring, p, q),
        PolyBackend::Karatsuba => karatsuba(ring, p, q),
    }
}

pub fn schoolbook<R: Ring>(ring: &R, p: &[R::Elem], q: &[R::Elem]) -> Vec<R::Elem> {
    if p.is_empty() || q.is_empty() {
        return Vec::new();
    }
    counter::charge((p.len() * q.len()) as u64);
    let mut out = vec![ring.zero(); p.len() + q.len() - 1];
    for (i, &x) in p.iter().enumerate() {
        for (j, &y) in q.iter().enumerate() {
            out[i + j] = ring.add(out[i + j], ring.mul(x, y));
        }
    }
    out
}

pub fn karatsuba<R: Ring>(ring: &R, p: &[R::Elem], q: &[R::Elem]) -> Vec<R::Elem> {
    if p.is_empty() || q.is_empty() {
        return Vec::new();
    }
    let n = p.len().max(q.len());
    let mut pp = p.to_vec();
    let mut qq = q.to_vec();
    pp.resize(n, ring.zero());
    qq.resize(n, ring.zero());
    let mut out = kara_eq(ring, &pp, &qq);
    out.truncate(p.len() + q.len() - 1);
    out
}

/// Equal-length operands; result has length `2n - 1`.
fn kara_eq<R: Ring>(ring: &R, p: &[R::Elem], q: &[R::Elem]) -> Vec<R::Elem> {
    let n = p.len();
    if n < KARATSUBA_CUTOFF {
        return schoolbook(ring, p, q);
    }
    let m = n / 2;
    let (p0, p1) = p.split_at(m);
    let (q0, q1) = q.split_at(m);
    let z0 = kara_eq(ring, p0, q0);
    let z2 = kara_eq(ring, p1, q1);

    // p1 and q1 are the longer halves
    let mut ps = p1.to_vec();
    let mut qs = q1.to_vec();
    for i in 0..m {
        ps[i] = ring.add(ps[i], p0[i]);
        qs[i] = ring.add(qs[i], q0[i]);
    }
    let mut z1 = kara_eq(ring, &ps, &qs);
    for (i, &v) in z0.iter().enumerate() {
        z1[i] = ring.sub(z1[i], v);
    }
    for (i, &v) in z2.iter().enumerate() {
        z1[i] = ring.sub(z1[i], v);
    }

    let mut out = vec![ring.zero(); 2 * n - 1];
    for (i, &v) in z0.iter().enumerate() {
        out[i] = ring.add(out[i], v);
    }
    for (i, &v) in z1.iter().enumerate() {
        out[i + m] = ring.add(out[i + m], v);
    }
    for (i, &v) in z2.iter().enumerate() {
        out[i + 2 * m] = ring.add(out[i + 2 * m], v);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::SeededBits;
    use crate::ring::{ModPrime, Wrap64};
    use proptest::prelude::*;

    #[test]
    fn small_identities() {
        let r = ModPrime::new(101).unwrap();
        let p = vec![3, 0, 7, 1];
        for backend in [PolyBackend::Schoolbook, PolyBackend::Karatsuba] {
            assert_eq!(poly_multiply(&r, &p, &[1], backend), p);
            assert_eq!(poly_multiply(&r, &[0, 1], &[0, 1], backend), vec![0, 0, 1]);
            assert!(poly_multiply(&r, &[], &p, backend).is_empty());
        }
    }

    #[test]
    fn degree_seven_cross_check() {
        let r = ModPrime::new(101).unwrap();
        let mut bits = SeededBits::seeded(77);
        let p: Vec<u64> = (0..8).map(|_| r.random(&mut bits)).collect();
        let q: Vec<u64> = (0..8).map(|_| r.random(&mut bits)).collect();
        assert_eq!(schoolbook(&r, &p, &q), karatsuba(&r, &p, &q));
    }

    #[test]
    fn karatsuba_is_cheaper_when_long() {
        let r = Wrap64::new();
        let p = vec![1u64; 512];
        let (_, school) = counter::measure(|| schoolbook(&r, &p, &p));
        let (_, kara) = counter::measure(|| karatsuba(&r, &p, &p));
        assert_eq!(school, 512 * 512);
        assert!(kara * 3 < school);
    }

    proptest! {
        #[test]
        fn backends_agree(p in prop::collection::vec(0u64..1_000_003, 0..150),
                          q in prop::collection::vec(0u64..1_000_003, 0..150)) {
            let r = ModPrime::new(1_000_003).unwrap();
            prop_assert_eq!(schoolbook(&r, &p, &q), karatsuba(&r, &p, &q));
        }

        #[test]
        fn backends_agree_wrapping(p in prop::collection::vec(any::<u64>(), 0..100),
                                   q in prop::collection::vec(any::<u64>(), 0..100)) {
            let r = Wrap64::new();
            prop_assert_eq!(schoolbook(&r, &p, &q), karatsuba(&r, &p, &q));
        }
    }
}
