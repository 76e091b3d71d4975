//! Partially revealed uniform variates.
//!
//! A coordinate whose first `k` bits are known is the dyadic interval
//! `[m / 2^k, (m + 1) / 2^k)`. The joint state of `n + 1` coordinates is a
//! [`FeasibleBox`]; the order in which bits were revealed is a [`CutString`].
//! Coordinates are numbered from 1, with coordinate `n + 1` playing the role
//! of the vertical variate.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::bitsource::BitSource;
use crate::error::{Error, Result};

/// Bits a single coordinate may accumulate before a run is abandoned.
pub const DEFAULT_BIT_CAP: u32 = 4096;

/// `mantissa / 2^exponent`, with value-based equality and ordering.
#[derive(Clone, Debug)]
pub struct DyadicRational {
    mantissa: BigUint,
    exponent: u32,
}

impl DyadicRational {
    pub fn new(mantissa: BigUint, exponent: u32) -> Self {
        Self { mantissa, exponent }
    }

    pub fn zero() -> Self {
        Self::new(BigUint::zero(), 0)
    }

    pub fn one() -> Self {
        Self::new(BigUint::one(), 0)
    }

    pub fn mantissa(&self) -> &BigUint {
        &self.mantissa
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    /// Appends one binary digit: `(m, k) -> (2m + b, k + 1)`.
    pub fn push_bit(&mut self, bit: u8) {
        self.mantissa <<= 1u32;
        if bit != 0 {
            self.mantissa += 1u32;
        }
        self.exponent += 1;
    }

    /// `self + 2^-exponent`, the exclusive upper end of the interval this
    /// prefix denotes.
    pub fn successor(&self) -> Self {
        Self::new(&self.mantissa + 1u32, self.exponent)
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(
            BigInt::from(self.mantissa.clone()),
            BigInt::one() << self.exponent as usize,
        )
    }

    /// Renders as `m/2^k`.
    pub fn to_dyadic_string(&self) -> String {
        format!("{}/2^{}", self.mantissa, self.exponent)
    }
}

impl PartialEq for DyadicRational {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for DyadicRational {}

impl PartialOrd for DyadicRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DyadicRational {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.exponent.cmp(&other.exponent) {
            Ordering::Equal => self.mantissa.cmp(&other.mantissa),
            Ordering::Greater => {
                let shift = (self.exponent - other.exponent) as usize;
                self.mantissa.cmp(&(&other.mantissa << shift))
            }
            Ordering::Less => {
                let shift = (other.exponent - self.exponent) as usize;
                (&self.mantissa << shift).cmp(&other.mantissa)
            }
        }
    }
}

impl fmt::Display for DyadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_dyadic_string())
    }
}

/// A uniform variate paired with the source that reveals it.
#[derive(Clone, Debug)]
pub struct LazyUniform<S> {
    prefix: DyadicRational,
    source: S,
}

impl<S: BitSource> LazyUniform<S> {
    pub fn new(source: S) -> Self {
        Self {
            prefix: DyadicRational::zero(),
            source,
        }
    }

    pub fn reveal(&mut self) -> u8 {
        let bit = self.source.next_bit();
        self.prefix.push_bit(bit);
        bit
    }

    pub fn bits(&self) -> u32 {
        self.prefix.exponent()
    }

    pub fn prefix(&self) -> &DyadicRational {
        &self.prefix
    }

    pub fn lower(&self) -> DyadicRational {
        self.prefix.clone()
    }

    pub fn upper(&self) -> DyadicRational {
        self.prefix.successor()
    }

    pub fn into_source(self) -> S {
        self.source
    }
}

/// The ordered record of cuts performed so far.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CutString {
    sequence: Vec<usize>,
    counts: Vec<u32>,
}

impl CutString {
    /// Empty cut string over coordinates `1..=dim`.
    pub fn new(dim: usize) -> Self {
        Self {
            sequence: Vec::new(),
            counts: vec![0; dim],
        }
    }

    pub fn push(&mut self, coord: usize) {
        assert!(
            (1..=self.counts.len()).contains(&coord),
            "coordinate {coord} outside 1..={}",
            self.counts.len()
        );
        self.sequence.push(coord);
        self.counts[coord - 1] += 1;
    }

    pub fn len(&self) -> usize {
        self.sequence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequence.is_empty()
    }

    pub fn sequence(&self) -> &[usize] {
        &self.sequence
    }

    /// Number of times coordinate `coord` (1-based) was cut.
    pub fn count(&self, coord: usize) -> u32 {
        self.counts[coord - 1]
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }
}

impl fmt::Display for CutString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.sequence.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Product of the dyadic intervals of all revealed coordinates.
///
/// Holds prefixes only: whatever decides the next cut from a box has no way
/// to look at bits that have not been revealed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeasibleBox {
    prefixes: Vec<DyadicRational>,
    bit_cap: u32,
}

impl FeasibleBox {
    /// The unit cube in `dim` coordinates.
    pub fn fresh(dim: usize) -> Self {
        Self::with_bit_cap(dim, DEFAULT_BIT_CAP)
    }

    pub fn with_bit_cap(dim: usize, bit_cap: u32) -> Self {
        assert!(dim >= 1);
        Self {
            prefixes: vec![DyadicRational::zero(); dim],
            bit_cap,
        }
    }

    /// Builds a box from explicit prefixes `(mantissa, bits)`.
    pub fn from_prefixes(prefixes: Vec<DyadicRational>) -> Self {
        assert!(!prefixes.is_empty());
        Self {
            prefixes,
            bit_cap: DEFAULT_BIT_CAP,
        }
    }

    pub fn dim(&self) -> usize {
        self.prefixes.len()
    }

    pub fn bit_cap(&self) -> u32 {
        self.bit_cap
    }

    pub fn prefix(&self, coord: usize) -> &DyadicRational {
        &self.prefixes[coord - 1]
    }

    pub fn prefixes(&self) -> &[DyadicRational] {
        &self.prefixes
    }

    pub fn bits(&self, coord: usize) -> u32 {
        self.prefixes[coord - 1].exponent()
    }

    pub fn lower(&self, coord: usize) -> BigRational {
        self.prefixes[coord - 1].to_rational()
    }

    pub fn upper(&self, coord: usize) -> BigRational {
        self.prefixes[coord - 1].successor().to_rational()
    }

    /// `(x*_1, ..., x*_{n+1})`.
    pub fn lower_corner(&self) -> Vec<BigRational> {
        self.prefixes.iter().map(|p| p.to_rational()).collect()
    }

    /// `(x*_1 + 2^-k_1, ..., x*_{n+1} + 2^-k_{n+1})`.
    pub fn upper_corner(&self) -> Vec<BigRational> {
        self.prefixes
            .iter()
            .map(|p| p.successor().to_rational())
            .collect()
    }

    /// Total revealed bits, which is the volume exponent: `vol = 2^-total`.
    pub fn total_bits(&self) -> u64 {
        self.prefixes.iter().map(|p| p.exponent() as u64).sum()
    }

    pub fn contains(&self, point: &[BigRational]) -> bool {
        point.len() == self.dim()
            && (1..=self.dim()).all(|c| {
                let x = &point[c - 1];
                self.lower(c) <= *x && *x < self.upper(c)
            })
    }

    /// Restriction to the first `k` coordinates.
    pub fn truncated(&self, k: usize) -> FeasibleBox {
        FeasibleBox {
            prefixes: self.prefixes[..k].to_vec(),
            bit_cap: self.bit_cap,
        }
    }

    /// Appends `bit` to coordinate `coord` without consulting a source.
    pub fn push_bit(&mut self, coord: usize, bit: u8) -> Result<()> {
        let p = &mut self.prefixes[coord - 1];
        if p.exponent() >= self.bit_cap {
            return Err(Error::BitCapExceeded {
                coord,
                cap: self.bit_cap,
                state: self.describe(),
            });
        }
        p.push_bit(bit);
        Ok(())
    }

    /// One line per coordinate, `j: [lo, hi) bits=k`.
    pub fn describe(&self) -> String {
        self.prefixes
            .iter()
            .enumerate()
            .map(|(i, p)| {
                format!(
                    "x{}: [{}, {}) bits={}",
                    i + 1,
                    p,
                    p.successor(),
                    p.exponent()
                )
            })
            .collect::<Vec<_>>()
            .join("; ")
    }
}

/// Reveals one bit of coordinate `coord` from `source`, recording the cut.
pub fn reveal<S: BitSource + ?Sized>(
    bx: &mut FeasibleBox,
    cuts: &mut CutString,
    coord: usize,
    source: &mut S,
) -> Result<()> {
    assert!(
        (1..=bx.dim()).contains(&coord),
        "coordinate {coord} outside 1..={}",
        bx.dim()
    );
    if bx.bits(coord) >= bx.bit_cap() {
        return Err(Error::BitCapExceeded {
            coord,
            cap: bx.bit_cap(),
            state: bx.describe(),
        });
    }
    let bit = source.next_bit();
    bx.push_bit(coord, bit)?;
    cuts.push(coord);
    Ok(())
}
