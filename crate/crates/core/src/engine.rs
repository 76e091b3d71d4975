//! The lazy decision procedure and the rejection sampler built on it.
//!
//! A run starts from the unit cube in `n + 1` coordinates and reveals one bit
//! at a time until the box no longer straddles the graph of `f`:
//!
//! * accept test: `f(upper x-corner) <= lower end of x_{n+1}` proves
//!   `f(X) < X_{n+1}` almost surely (verdict [`Verdict::Lt`]);
//! * reject test: `f(lower x-corner) >= upper end of x_{n+1}` proves
//!   `f(X) > X_{n+1}` almost surely (verdict [`Verdict::Gt`]).
//!
//! Both tests are non-strict. Equality on the boundary has probability zero,
//! and strict tests never fire when `f` is a dyadic constant.

use std::fmt;

use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use crate::bitsource::{derive_trial_seed, BitSource, PseudoRandomBitSource};
use crate::error::{Error, Result};
use crate::lazybox::{reveal, CutString, FeasibleBox, LazyUniform, DEFAULT_BIT_CAP};
use crate::monofn::MonotoneOracle;

pub const DEFAULT_CUT_CAP: usize = 10_000;
pub const DEFAULT_ATTEMPT_CAP: u64 = 1_000_000;

/// Chooses the next coordinate to cut from the revealed state only.
pub trait Strategy: Send + Sync {
    fn name(&self) -> &'static str;

    /// A coordinate in `1..=bx.dim()`.
    fn next_cut(&self, f: &dyn MonotoneOracle, cuts: &CutString, bx: &FeasibleBox) -> usize;
}

/// Round robin `1, 2, ..., n+1, 1, 2, ...`.
#[derive(Clone, Copy, Debug, Default)]
pub struct AltStrategy;

impl Strategy for AltStrategy {
    fn name(&self) -> &'static str {
        "alt"
    }

    fn next_cut(&self, _f: &dyn MonotoneOracle, cuts: &CutString, bx: &FeasibleBox) -> usize {
        cuts.len() % bx.dim() + 1
    }
}

/// Round robin starting with the vertical coordinate: `n+1, 1, ..., n, n+1, ...`.
#[derive(Clone, Copy, Debug, Default)]
pub struct OutputFirstStrategy;

impl Strategy for OutputFirstStrategy {
    fn name(&self) -> &'static str {
        "output-first"
    }

    fn next_cut(&self, _f: &dyn MonotoneOracle, cuts: &CutString, bx: &FeasibleBox) -> usize {
        let d = bx.dim();
        (cuts.len() + d - 1) % d + 1
    }
}

/// Cuts the coordinate whose interval moves `f` (or the vertical variate)
/// the most.
///
/// For an input coordinate the score is the larger change of `f` when that
/// coordinate alone slides across its interval at either corner; for the
/// vertical coordinate it is the interval width. Ties go to the lowest index.
/// A coordinate lagging the most refined one by [`GreedyStrategy::MAX_LAG`]
/// bits is cut first, so every interval keeps shrinking.
#[derive(Clone, Copy, Debug, Default)]
pub struct GreedyStrategy;

impl GreedyStrategy {
    pub const MAX_LAG: u32 = 4;
}

impl Strategy for GreedyStrategy {
    fn name(&self) -> &'static str {
        "greedy"
    }

    fn next_cut(&self, f: &dyn MonotoneOracle, _cuts: &CutString, bx: &FeasibleBox) -> usize {
        let d = bx.dim();
        let n = d - 1;
        let most = (1..=d).map(|c| bx.bits(c)).max().unwrap_or(0);
        if let Some(c) = (1..=d).find(|&c| most - bx.bits(c) >= Self::MAX_LAG) {
            return c;
        }
        let lo = bx.lower_corner();
        let hi = bx.upper_corner();
        let f_lo = f.eval(&lo[..n]);
        let f_hi = f.eval(&hi[..n]);
        let mut best = d;
        let mut best_score = &hi[n] - &lo[n];
        for c in 1..=n {
            let mut p = hi[..n].to_vec();
            p[c - 1] = lo[c - 1].clone();
            let drop = &f_hi - f.eval(&p);
            let mut p = lo[..n].to_vec();
            p[c - 1] = hi[c - 1].clone();
            let rise = f.eval(&p) - &f_lo;
            let score = if drop > rise { drop } else { rise };
            if score > best_score || (score == best_score && c < best) {
                best = c;
                best_score = score;
            }
        }
        best
    }
}

/// Looks up a shipped strategy by name.
pub fn strategy_by_name(name: &str) -> Result<Box<dyn Strategy>> {
    match name {
        "alt" => Ok(Box::new(AltStrategy)),
        "output-first" => Ok(Box::new(OutputFirstStrategy)),
        "greedy" => Ok(Box::new(GreedyStrategy)),
        other => Err(Error::UnknownStrategy(other.to_string())),
    }
}

pub fn shipped_strategies() -> Vec<Box<dyn Strategy>> {
    vec![
        Box::new(AltStrategy),
        Box::new(OutputFirstStrategy),
        Box::new(GreedyStrategy),
    ]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    /// `f(X) < X_{n+1}`: the point lies above the graph.
    Lt,
    /// `f(X) > X_{n+1}`: the point lies under the graph.
    Gt,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Lt => "LT",
            Verdict::Gt => "GT",
        })
    }
}

#[derive(Clone, Debug)]
pub struct DecisionOutcome {
    pub verdict: Verdict,
    pub cuts: CutString,
    pub bx: FeasibleBox,
}

impl DecisionOutcome {
    pub fn bits(&self) -> usize {
        self.cuts.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub cut_cap: usize,
    pub bit_cap: u32,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            cut_cap: DEFAULT_CUT_CAP,
            bit_cap: DEFAULT_BIT_CAP,
        }
    }
}

impl Limits {
    pub fn with_cut_cap(cut_cap: usize) -> Self {
        Self {
            cut_cap,
            ..Self::default()
        }
    }
}

fn check_arity(f: &dyn MonotoneOracle, bx: &FeasibleBox) {
    assert_eq!(
        bx.dim(),
        f.arity() + 1,
        "box has {} coordinates, function takes {} inputs",
        bx.dim(),
        f.arity()
    );
}

/// `f(upper x-corner) <= x*_{n+1}`.
pub fn can_accept(f: &dyn MonotoneOracle, bx: &FeasibleBox) -> bool {
    check_arity(f, bx);
    let n = f.arity();
    let corner: Vec<BigRational> = (1..=n).map(|c| bx.upper(c)).collect();
    f.eval(&corner) <= bx.lower(n + 1)
}

/// `f(lower x-corner) >= x*_{n+1} + 2^-k_{n+1}`.
pub fn can_reject(f: &dyn MonotoneOracle, bx: &FeasibleBox) -> bool {
    check_arity(f, bx);
    let n = f.arity();
    let corner: Vec<BigRational> = (1..=n).map(|c| bx.lower(c)).collect();
    f.eval(&corner) >= bx.upper(n + 1)
}

/// Neither halting test holds: the graph of `f` cuts through the box.
pub fn crosses(f: &dyn MonotoneOracle, bx: &FeasibleBox) -> bool {
    !can_accept(f, bx) && !can_reject(f, bx)
}

fn halted(f: &dyn MonotoneOracle, bx: &FeasibleBox) -> Option<Verdict> {
    let accept = can_accept(f, bx);
    let reject = can_reject(f, bx);
    assert!(!(accept && reject), "both halting tests hold on {}", bx.describe());
    if accept {
        Some(Verdict::Lt)
    } else if reject {
        Some(Verdict::Gt)
    } else {
        None
    }
}

/// Reveals bits from `sources` (one per coordinate) until the box decides
/// `f(X)` against `X_{n+1}`.
pub fn decide<S: BitSource>(
    f: &dyn MonotoneOracle,
    strategy: &dyn Strategy,
    sources: &mut [S],
    limits: Limits,
) -> Result<DecisionOutcome> {
    let dim = f.arity() + 1;
    assert_eq!(sources.len(), dim, "need one source per coordinate");
    assert!(limits.cut_cap >= 1);
    let mut bx = FeasibleBox::with_bit_cap(dim, limits.bit_cap);
    let mut cuts = CutString::new(dim);
    loop {
        if let Some(verdict) = halted(f, &bx) {
            return Ok(DecisionOutcome { verdict, cuts, bx });
        }
        if cuts.len() >= limits.cut_cap {
            return Err(Error::CutBudgetExceeded {
                cap: limits.cut_cap,
                state: format!("cuts={cuts}; {}", bx.describe()),
            });
        }
        let c = strategy.next_cut(f, &cuts, &bx);
        reveal(&mut bx, &mut cuts, c, &mut sources[c - 1])?;
    }
}

/// Pseudo-random sources for one decision, one stream per coordinate.
pub fn trial_sources(trial_seed: u64, dim: usize) -> Vec<PseudoRandomBitSource> {
    (0..dim)
        .map(|j| PseudoRandomBitSource::new(derive_trial_seed(trial_seed, j as u64)))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Side {
    Less,
    Greater,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Less => "LESS",
            Side::Greater => "GREATER",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ThresholdOutcome {
    pub side: Side,
    pub bits: usize,
}

/// Decides `X` against a fixed `c` by revealing bits of `X` until its
/// interval lies on one side of `c`.
pub fn compare_to_constant<S: BitSource>(
    c: &BigRational,
    source: S,
    cut_cap: usize,
) -> Result<ThresholdOutcome> {
    let mut x = LazyUniform::new(source);
    loop {
        if x.lower().to_rational() >= *c {
            return Ok(ThresholdOutcome {
                side: Side::Greater,
                bits: x.bits() as usize,
            });
        }
        if x.upper().to_rational() <= *c {
            return Ok(ThresholdOutcome {
                side: Side::Less,
                bits: x.bits() as usize,
            });
        }
        if x.bits() as usize >= cut_cap {
            return Err(Error::CutBudgetExceeded {
                cap: cut_cap,
                state: format!("x: [{}, {}) against {c}", x.lower(), x.upper()),
            });
        }
        x.reveal();
    }
}

/// One accepted point: its box over the input coordinates, the sources that
/// can refine it further, and what it cost.
#[derive(Clone, Debug)]
pub struct Accepted {
    pub bx: FeasibleBox,
    pub sources: Vec<PseudoRandomBitSource>,
    pub attempts: u64,
    /// Bits revealed by all decisions, rejected attempts included.
    pub bits: u64,
}

/// Rejection sampler drawing fresh variates per attempt from a master seed.
pub struct Sampler<'a> {
    f: &'a dyn MonotoneOracle,
    strategy: &'a dyn Strategy,
    master_seed: u64,
    next_attempt: u64,
    limits: Limits,
    attempt_cap: u64,
}

impl<'a> Sampler<'a> {
    pub fn new(f: &'a dyn MonotoneOracle, strategy: &'a dyn Strategy, master_seed: u64) -> Self {
        Self {
            f,
            strategy,
            master_seed,
            next_attempt: 0,
            limits: Limits::default(),
            attempt_cap: DEFAULT_ATTEMPT_CAP,
        }
    }

    pub fn limits(mut self, limits: Limits) -> Self {
        self.limits = limits;
        self
    }

    pub fn attempt_cap(mut self, cap: u64) -> Self {
        self.attempt_cap = cap;
        self
    }

    /// Attempts consumed so far across all calls.
    pub fn attempts_used(&self) -> u64 {
        self.next_attempt
    }

    /// Runs decisions until one lands under the graph (`X_{n+1} < f(X)`).
    pub fn sample(&mut self) -> Result<Accepted> {
        let dim = self.f.arity() + 1;
        let mut bits = 0u64;
        for attempt in 1..=self.attempt_cap {
            let seed = derive_trial_seed(self.master_seed, self.next_attempt);
            self.next_attempt += 1;
            let mut sources = trial_sources(seed, dim);
            let out = decide(self.f, self.strategy, &mut sources, self.limits)?;
            bits += out.cuts.len() as u64;
            if out.verdict == Verdict::Gt {
                sources.truncate(dim - 1);
                return Ok(Accepted {
                    bx: out.bx.truncated(dim - 1),
                    sources,
                    attempts: attempt,
                    bits,
                });
            }
        }
        Err(Error::AttemptBudgetExceeded {
            cap: self.attempt_cap,
        })
    }
}

/// Reveals bits until every coordinate of `bx` carries exactly `target` bits.
pub fn refine<S: BitSource>(bx: &mut FeasibleBox, sources: &mut [S], target: u32) -> Result<()> {
    assert_eq!(sources.len(), bx.dim());
    if let Some(c) = (1..=bx.dim()).find(|&c| bx.bits(c) > target) {
        return Err(Error::InvalidArgument(format!(
            "coordinate {c} already has {} bits, more than the target {target}",
            bx.bits(c)
        )));
    }
    for (c, source) in (1..=bx.dim()).zip(sources.iter_mut()) {
        while bx.bits(c) < target {
            bx.push_bit(c, source.next_bit())?;
        }
    }
    Ok(())
}

/// `count` independent accepted samples, sample `i` drawn from master seed
/// `derive_trial_seed(seed, i)` and refined to `precision` bits. Runs on the
/// current rayon pool; output order is by sample index.
pub fn sample_many(
    f: &dyn MonotoneOracle,
    strategy: &dyn Strategy,
    seed: u64,
    count: u64,
    precision: u32,
    limits: Limits,
    attempt_cap: u64,
) -> Result<Vec<Accepted>> {
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut sampler = Sampler::new(f, strategy, derive_trial_seed(seed, i))
                .limits(limits)
                .attempt_cap(attempt_cap);
            let mut acc = sampler.sample()?;
            let target = precision.max((1..=acc.bx.dim()).map(|c| acc.bx.bits(c)).max().unwrap_or(0));
            refine(&mut acc.bx, &mut acc.sources, target)?;
            Ok(acc)
        })
        .collect()
}
