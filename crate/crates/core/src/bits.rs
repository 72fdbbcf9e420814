//! Bit-metered randomness.
//!
//! Every randomized routine in the crate draws through a [`BitSource`], which
//! hands out exactly as many bits as were asked for and keeps a running tally.
//! The tally is what the reports call `random_bits`.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A bit-granular view over a word generator that counts every bit handed out.
#[derive(Clone, Debug)]
pub struct BitSource<R> {
    rng: R,
    buf: u64,
    avail: u32,
    consumed: u64,
}

/// The generator used throughout the crate: ChaCha8, seeded explicitly.
pub type SeededBits = BitSource<ChaCha8Rng>;

impl SeededBits {
    pub fn seeded(seed: u64) -> Self {
        Self::new(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Independent stream `stream` of the generator keyed by `seed`.
    pub fn stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self::new(rng)
    }
}

impl<R: RngCore> BitSource<R> {
    pub fn new(rng: R) -> Self {
        Self {
            rng,
            buf: 0,
            avail: 0,
            consumed: 0,
        }
    }

    /// Total number of bits handed out so far.
    pub fn consumed(&self) -> u64 {
        self.consumed
    }

    /// Returns `k` fresh random bits in the low end of a word (`k <= 64`).
    pub fn bits(&mut self, k: u32) -> u64 {
        assert!(k <= 64, "at most 64 bits per draw");
        if k == 0 {
            return 0;
        }
        self.consumed += u64::from(k);
        if k <= self.avail {
            let out = if k == 64 { self.buf } else { self.buf & ((1u64 << k) - 1) };
            self.buf = if k == 64 { 0 } else { self.buf >> k };
            self.avail -= k;
            return out;
        }
        // take what is buffered, refill, take the rest
        let low_len = self.avail;
        let low = self.buf;
        let word = self.rng.next_u64();
        let need = k - low_len;
        let high = if need == 64 { word } else { word & ((1u64 << need) - 1) };
        self.buf = if need == 64 { 0 } else { word >> need };
        self.avail = 64 - need;
        if low_len == 0 {
            high
        } else {
            low | (high << low_len)
        }
    }

    pub fn bit(&mut self) -> bool {
        self.bits(1) == 1
    }

    /// Uniform integer in `0..m` by rejection sampling on `ceil(log2 m)`-bit
    /// draws. `m == 1` costs nothing.
    pub fn below(&mut self, m: u64) -> u64 {
        assert!(m >= 1, "empty range");
        if m == 1 {
            return 0;
        }
        let width = 64 - (m - 1).leading_zeros();
        loop {
            let x = self.bits(width);
            if x < m {
                return x;
            }
        }
    }

    /// A vector of `len` independent fair bits.
    pub fn bool_vec(&mut self, len: usize) -> Vec<bool> {
        (0..len).map(|_| self.bit()).collect()
    }
}
