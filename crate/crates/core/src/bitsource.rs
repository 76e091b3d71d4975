//! Fair bit streams.
//!
//! Two kinds of source are provided: a seeded pseudo-random stream
//! (xoshiro256** expanded from a 64-bit seed with SplitMix64) and a tape that
//! replays the exact binary expansion of a rational in `[0, 1)`.

use num_bigint::BigUint;
use num_traits::Zero;

use crate::error::{Error, Result};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// A stream of fair bits, consumed one at a time.
pub trait BitSource {
    fn next_bit(&mut self) -> u8;

    /// Number of bits emitted so far.
    fn position(&self) -> u64;
}

impl<S: BitSource + ?Sized> BitSource for Box<S> {
    fn next_bit(&mut self) -> u8 {
        (**self).next_bit()
    }

    fn position(&self) -> u64 {
        (**self).position()
    }
}

impl<S: BitSource + ?Sized> BitSource for &mut S {
    fn next_bit(&mut self) -> u8 {
        (**self).next_bit()
    }

    fn position(&self) -> u64 {
        (**self).position()
    }
}

/// The SplitMix64 output finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for trial `trial_index` of a run seeded with `master_seed`.
///
/// Bit-exact on every platform, so trials can be farmed out to any number of
/// workers and still reproduce the sequential run.
#[inline]
pub fn derive_trial_seed(master_seed: u64, trial_index: u64) -> u64 {
    mix64(master_seed ^ trial_index.wrapping_mul(GOLDEN_GAMMA))
}

struct SplitMix64(u64);

impl SplitMix64 {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(GOLDEN_GAMMA);
        mix64(self.0)
    }
}

/// xoshiro256** generator state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Xoshiro256StarStar {
    s: [u64; 4],
}

impl Xoshiro256StarStar {
    pub fn seed_from_u64(seed: u64) -> Self {
        let mut sm = SplitMix64(seed);
        let s = [sm.next(), sm.next(), sm.next(), sm.next()];
        Self { s }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let result = self.s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
        let t = self.s[1] << 17;
        self.s[2] ^= self.s[0];
        self.s[3] ^= self.s[1];
        self.s[1] ^= self.s[2];
        self.s[0] ^= self.s[3];
        self.s[2] ^= t;
        self.s[3] = self.s[3].rotate_left(45);
        result
    }

    /// Uniform integer in `[0, bound)`, by rejection on the top of the range.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "empty range");
        let zone = u64::MAX - (u64::MAX % bound);
        loop {
            let v = self.next_u64();
            if v < zone {
                return v % bound;
            }
        }
    }

    /// Uniform `f64` in `[0, 1)` with 53 bits of resolution.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Seeded pseudo-random bit stream, MSB-first from each 64-bit word.
#[derive(Clone, Debug)]
pub struct PseudoRandomBitSource {
    seed: u64,
    rng: Xoshiro256StarStar,
    word: u64,
    pending: u32,
    position: u64,
}

impl PseudoRandomBitSource {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: Xoshiro256StarStar::seed_from_u64(seed),
            word: 0,
            pending: 0,
            position: 0,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

impl BitSource for PseudoRandomBitSource {
    #[inline]
    fn next_bit(&mut self) -> u8 {
        if self.pending == 0 {
            self.word = self.rng.next_u64();
            self.pending = 64;
        }
        self.pending -= 1;
        self.position += 1;
        ((self.word >> self.pending) & 1) as u8
    }

    fn position(&self) -> u64 {
        self.position
    }
}

/// Replays the binary expansion of `p/q` by long division.
#[derive(Clone, Debug)]
pub struct TapeBitSource {
    numerator: BigUint,
    denominator: BigUint,
    remainder: BigUint,
    position: u64,
}

impl TapeBitSource {
    /// Tape for `p/q`; requires `0 <= p < q`.
    pub fn new(p: BigUint, q: BigUint) -> Result<Self> {
        if q.is_zero() || p >= q {
            return Err(Error::TapeOutOfRange(format!("{p}/{q}")));
        }
        Ok(Self {
            remainder: p.clone(),
            numerator: p,
            denominator: q,
            position: 0,
        })
    }

    pub fn from_u64(p: u64, q: u64) -> Result<Self> {
        Self::new(BigUint::from(p), BigUint::from(q))
    }

    pub fn numerator(&self) -> &BigUint {
        &self.numerator
    }

    pub fn denominator(&self) -> &BigUint {
        &self.denominator
    }
}

impl BitSource for TapeBitSource {
    fn next_bit(&mut self) -> u8 {
        self.position += 1;
        self.remainder <<= 1u32;
        if self.remainder >= self.denominator {
            self.remainder -= &self.denominator;
            1
        } else {
            0
        }
    }

    fn position(&self) -> u64 {
        self.position
    }
}
