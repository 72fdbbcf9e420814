//! Correction through hashed difference polynomials.
//!
//! For a hash pair `(g, h)` into `1..=s` the polynomial
//!
//! ```text
//! p(x) = sum_k (sum_i a_ik x^g(i)) (sum_j b_kj x^h(j)) - sum_ij c'_ij x^(g(i)+h(j))
//! ```
//!
//! has, at exponent `g(i) + h(j)`, the sum of `c_ij - c'_ij` over every cell
//! hashing there. With `s` a few times `k` a given cell rarely shares its
//! exponent with another wrong cell, so over `t` independent pairs the true
//! delta of each cell is the strict majority of what it reads.

mod hash;
mod poly;

pub use hash::{hash_modulus, sample_hash_pairs, HashPair};
pub use poly::{karatsuba, poly_multiply, schoolbook, PolyBackend, KARATSUBA_CUTOFF};

use rand::RngCore;

use crate::bits::BitSource;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::report::{Correction, ErrorReport};
use crate::ring::{counter, Ring};
use crate::verifier::{default_rounds, log2_ceil, verify_product};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SketchParams {
    /// Hash range.
    pub s: usize,
    /// Number of hash pairs; odd.
    pub t: usize,
    /// Extra attempts with fresh pairs after a failed decode or check.
    pub retries: usize,
}

impl SketchParams {
    /// `s = max(4k, 8)` and `t` the least odd integer `>= t_factor * ceil(log2 n)`.
    pub fn for_problem(n: usize, k: usize, t_factor: usize, retries: usize) -> Self {
        let t = (t_factor.max(1) * log2_ceil(n)) | 1;
        Self {
            s: (4 * k.max(1)).max(8),
            t,
            retries,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CompressedConfig {
    /// Repetitions per `ceil(log2 n)`.
    pub t_factor: usize,
    pub retries: usize,
    pub backend: PolyBackend,
    /// Skip the majority vote for cells whose reads are all zero.
    pub skip_zero_cells: bool,
    /// Freivalds rounds per `ceil(log2 n)` in the final check.
    pub c_verify: usize,
}

impl Default for CompressedConfig {
    fn default() -> Self {
        Self {
            t_factor: 10,
            retries: 3,
            backend: PolyBackend::Karatsuba,
            skip_zero_cells: false,
            c_verify: 3,
        }
    }
}

/// The `t` difference polynomials, each of length `2s + 1` (index = exponent;
/// exponents 0 and 1 are always zero).
#[derive(Clone, Debug, PartialEq)]
pub struct Sketch<R: Ring> {
    pub s: usize,
    pub pairs: Vec<HashPair>,
    pub polys: Vec<Vec<R::Elem>>,
    ring: R,
    rows: usize,
    cols: usize,
}

impl<R: Ring> Sketch<R> {
    pub fn t(&self) -> usize {
        self.pairs.len()
    }

    /// Ring elements held by the sketch.
    pub fn memory_elems(&self) -> usize {
        self.polys.iter().map(Vec::len).sum()
    }

    /// What cell `(i, j)` (0-based) reads from polynomial `l`.
    pub fn coefficient(&self, l: usize, i: usize, j: usize) -> R::Elem {
        let pair = &self.pairs[l];
        self.polys[l][pair.g(i + 1) + pair.h(j + 1)]
    }
}

/// Evaluates the difference polynomials for the given pairs.
pub fn build_sketch<R: Ring>(
    a: &Matrix<R>,
    b: &Matrix<R>,
    c: &Matrix<R>,
    pairs: &[HashPair],
    backend: PolyBackend,
) -> Result<Sketch<R>> {
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
    let ring = *c.ring();
    let s = pairs.first().map_or(1, |p| p.s);
    let polys = pairs
        .iter()
        .map(|pair| {
            assert_eq!(pair.s, s, "hash pairs must share a range");
            let g = pair.g_table(a.rows());
            let h = pair.h_table(b.cols());
            let mut acc = vec![ring.zero(); 2 * s + 1];
            let mut pa = vec![ring.zero(); s];
            let mut pb = vec![ring.zero(); s];
            for k in 0..a.cols() {
                pa.fill(ring.zero());
                pb.fill(ring.zero());
                for (i, &gi) in g.iter().enumerate() {
                    pa[gi] = ring.add(pa[gi], a.get(i, k));
                }
                for (&hj, &v) in h.iter().zip(b.row(k)) {
                    pb[hj] = ring.add(pb[hj], v);
                }
                // bucket polynomials start at exponent 1, so the product at 2
                for (e, v) in poly_multiply(&ring, &pa, &pb, backend).into_iter().enumerate() {
                    acc[e + 2] = ring.add(acc[e + 2], v);
                }
            }
            for (i, &gi) in g.iter().enumerate() {
                for (&hj, &v) in h.iter().zip(c.row(i)) {
                    acc[gi + hj + 2] = ring.sub(acc[gi + hj + 2], v);
                }
            }
            acc
        })
        .collect();
    Ok(Sketch {
        s,
        pairs: pairs.to_vec(),
        polys,
        ring,
        rows: c.rows(),
        cols: c.cols(),
    })
}

/// Strict majority of `reads`, if any.
fn majority<E: Copy + Eq>(reads: &[E]) -> Option<E> {
    let mut cand = *reads.first()?;
    let mut votes = 0usize;
    for &x in reads {
        if votes == 0 {
            cand = x;
            votes = 1;
        } else if x == cand {
            votes += 1;
        } else {
            votes -= 1;
        }
    }
    let count = reads.iter().filter(|&&x| x == cand).count();
    (2 * count > reads.len()).then_some(cand)
}

/// Decodes every cell's delta by majority over the `t` reads and applies the
/// nonzero ones to `c`.
pub fn recover_corrections<R: Ring>(
    sk: &Sketch<R>,
    c: &Matrix<R>,
    skip_zero_cells: bool,
) -> Result<(Matrix<R>, ErrorReport<R::Elem>)> {
    if (c.rows(), c.cols()) != (sk.rows, sk.cols) {
        return Err(Error::DimMismatch(format!(
            "sketch of {}x{}, C {}x{}",
            sk.rows,
            sk.cols,
            c.rows(),
            c.cols()
        )));
    }
    let ring = sk.ring;
    let zero = ring.zero();
    let gs: Vec<Vec<usize>> = sk.pairs.iter().map(|p| p.g_table(c.rows())).collect();
    let hs: Vec<Vec<usize>> = sk.pairs.iter().map(|p| p.h_table(c.cols())).collect();
    let mut out = c.clone();
    let mut report = ErrorReport::default();
    let mut reads = vec![zero; sk.t()];
    for i in 0..c.rows() {
        for j in 0..c.cols() {
            for (l, r) in reads.iter_mut().enumerate() {
                *r = sk.polys[l][gs[l][i] + hs[l][j] + 2];
            }
            if skip_zero_cells && reads.iter().all(|&x| x == zero) {
                continue;
            }
            let delta = majority(&reads).ok_or(Error::MajorityFailure { row: i, col: j })?;
            if delta != zero {
                let old = c.get(i, j);
                let new = ring.add(old, delta);
                out.set_entry(i, j, new);
                report.corrections.push(Correction { row: i, col: j, old, new });
            }
        }
    }
    Ok((out, report))
}

/// Sketch-and-decode with fresh pairs on failure. With `k` absent the bound is
/// guessed as `4, 16, 64, ...` until a decode passes the final check.
pub fn correct_compressed<R: Ring, S: RngCore>(
    a: &Matrix<R>,
    b: &Matrix<R>,
    c: &Matrix<R>,
    k: Option<usize>,
    cfg: &CompressedConfig,
    bits: &mut BitSource<S>,
) -> Result<(Matrix<R>, ErrorReport<R::Elem>)> {
    let start = bits.consumed();
    let (out, mults) = counter::measure(|| compressed_inner(a, b, c, k, cfg, bits));
    let used = bits.consumed() - start;
    out.map(|(m, mut report)| {
        report.ring_mults = mults;
        report.random_bits = used;
        (m, report)
    })
}

fn compressed_inner<R: Ring, S: RngCore>(
    a: &Matrix<R>,
    b: &Matrix<R>,
    c: &Matrix<R>,
    k: Option<usize>,
    cfg: &CompressedConfig,
    bits: &mut BitSource<S>,
) -> Result<(Matrix<R>, ErrorReport<R::Elem>)> {
    let n = a.rows().max(a.cols()).max(b.cols()).max(2);
    let rounds = default_rounds(cfg.c_verify, n);
    let cells = c.rows() * c.cols();
    let mut report = ErrorReport::default();
    let mut attempts = 0;
    let mut guess = k.unwrap_or(4);
    loop {
        if k.is_none() {
            report.guesses.push(guess);
        }
        let params = SketchParams::for_problem(n, guess, cfg.t_factor, cfg.retries);
        for _ in 0..=params.retries {
            if attempts > 0 {
                report.restarts += 1;
            }
            attempts += 1;
            report.iterations += 1;
            let pairs = sample_hash_pairs(params.t, params.s, n, bits)?;
            let sketch = build_sketch(a, b, c, &pairs, cfg.backend)?;
            let (fixed, found) = match recover_corrections(&sketch, c, cfg.skip_zero_cells) {
                Ok(decoded) => decoded,
                Err(Error::MajorityFailure { .. }) => continue,
                Err(e) => return Err(e),
            };
            if verify_product(a, b, &fixed, rounds, bits)? {
                report.corrections = found.corrections;
                return Ok((fixed, report));
            }
        }
        if k.is_some() || guess >= cells {
            return Err(Error::RetriesExhausted { attempts });
        }
        guess *= 4;
    }
}
