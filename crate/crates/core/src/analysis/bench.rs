//! Monte Carlo estimates of expected bit cost.
//!
//! Trial `i` of a run seeded with `s` draws its variates from
//! `derive_trial_seed(s, i)`. Trials may execute on any number of threads;
//! results are aggregated in index order so reports are bit-exact.

use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use crate::bitsource::{derive_trial_seed, PseudoRandomBitSource};
use crate::engine::{compare_to_constant, decide, trial_sources, Limits, Strategy};
use crate::error::Error;
use crate::monofn::MonotoneOracle;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchResult {
    pub n: usize,
    pub function: String,
    pub strategy: String,
    pub trials: u64,
    pub seed: u64,
    pub mean: f64,
    pub stderr: f64,
    pub ci95: f64,
    /// Trials that hit a budget; excluded from the statistics.
    pub overflows: u64,
    pub min_bits: u64,
    pub max_bits: u64,
}

/// Per-trial bit counts; `None` marks a trial that exhausted its budget.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrialCounts(pub Vec<Option<u64>>);

impl TrialCounts {
    pub fn completed(&self) -> impl Iterator<Item = u64> + '_ {
        self.0.iter().flatten().copied()
    }

    pub fn overflows(&self) -> u64 {
        self.0.iter().filter(|c| c.is_none()).count() as u64
    }

    /// `sum_i N_i` over completed trials.
    pub fn total(&self) -> u64 {
        self.completed().sum()
    }

    /// `sum_{l >= 0} #{i : N_i > l}`, accumulated level by level.
    pub fn tail_total(&self) -> u64 {
        let max = self.completed().max().unwrap_or(0);
        let mut hist = vec![0u64; max as usize + 1];
        for c in self.completed() {
            hist[c as usize] += 1;
        }
        let mut above = self.completed().count() as u64;
        let mut total = 0u64;
        for h in hist {
            above -= h;
            total += above;
        }
        total
    }

    /// Empirical `P(N > l)` for `l = 0..=max`.
    pub fn survival(&self) -> Vec<f64> {
        let done = self.completed().count();
        if done == 0 {
            return Vec::new();
        }
        let max = self.completed().max().unwrap_or(0) as usize;
        let mut hist = vec![0u64; max + 1];
        for c in self.completed() {
            hist[c as usize] += 1;
        }
        let mut above = done as u64;
        hist.iter()
            .map(|h| {
                above -= h;
                above as f64 / done as f64
            })
            .collect()
    }

    pub fn summarize(
        &self,
        n: usize,
        function: impl Into<String>,
        strategy: impl Into<String>,
        seed: u64,
    ) -> BenchResult {
        let done: Vec<u64> = self.completed().collect();
        let k = done.len() as f64;
        let mean = if done.is_empty() { f64::NAN } else { self.total() as f64 / k };
        let var = if done.len() > 1 {
            done.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / (k - 1.0)
        } else {
            0.0
        };
        let stderr = (var / k).sqrt();
        BenchResult {
            n,
            function: function.into(),
            strategy: strategy.into(),
            trials: self.0.len() as u64,
            seed,
            mean,
            stderr,
            ci95: 1.96 * stderr,
            overflows: self.overflows(),
            min_bits: done.iter().copied().min().unwrap_or(0),
            max_bits: done.iter().copied().max().unwrap_or(0),
        }
    }
}

fn budget_or_panic(e: Error) -> Option<u64> {
    assert!(e.is_budget(), "unexpected failure in trial: {e}");
    None
}

/// Cut counts of `trials` independent decisions of `f` under `strategy`.
pub fn run_trials(
    f: &dyn MonotoneOracle,
    strategy: &dyn Strategy,
    trials: u64,
    seed: u64,
    limits: Limits,
) -> TrialCounts {
    let dim = f.arity() + 1;
    TrialCounts(
        (0..trials)
            .into_par_iter()
            .map(|i| {
                let mut sources = trial_sources(derive_trial_seed(seed, i), dim);
                match decide(f, strategy, &mut sources, limits) {
                    Ok(out) => Some(out.cuts.len() as u64),
                    Err(e) => budget_or_panic(e),
                }
            })
            .collect(),
    )
}

pub fn empirical_bits(
    f: &dyn MonotoneOracle,
    strategy: &dyn Strategy,
    trials: u64,
    seed: u64,
    limits: Limits,
) -> BenchResult {
    assert!(trials >= 1);
    run_trials(f, strategy, trials, seed, limits).summarize(f.arity(), f.name(), strategy.name(), seed)
}

/// Bits revealed to place a uniform `X` against the constant `c`.
pub fn threshold_trials(c: &BigRational, trials: u64, seed: u64, cut_cap: usize) -> TrialCounts {
    TrialCounts(
        (0..trials)
            .into_par_iter()
            .map(|i| {
                let src = PseudoRandomBitSource::new(derive_trial_seed(seed, i));
                match compare_to_constant(c, src, cut_cap) {
                    Ok(out) => Some(out.bits as u64),
                    Err(e) => budget_or_panic(e),
                }
            })
            .collect(),
    )
}

pub fn empirical_threshold_bits(c: &BigRational, trials: u64, seed: u64, cut_cap: usize) -> BenchResult {
    assert!(trials >= 1);
    threshold_trials(c, trials, seed, cut_cap).summarize(0, format!("threshold:{c}"), "sequential", seed)
}

/// Outcome of a lower-bound sweep for one strategy.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FloorReport {
    pub n: usize,
    pub strategy: String,
    pub trials: u64,
    pub min_cuts: u64,
    /// Trials that finished with exactly `n + 1` cuts.
    pub at_floor: u64,
    pub overflows: u64,
    /// First trial index below `n + 1`, if any.
    pub violation: Option<u64>,
}

/// Runs `trials` decisions of `f` and reports the smallest cut count against
/// the floor `n + 1`.
pub fn verify_floor(
    f: &dyn MonotoneOracle,
    strategy: &dyn Strategy,
    trials: u64,
    seed: u64,
    limits: Limits,
) -> FloorReport {
    let n = f.arity();
    let counts = run_trials(f, strategy, trials, seed, limits);
    let floor = n as u64 + 1;
    FloorReport {
        n,
        strategy: strategy.name().to_string(),
        trials,
        min_cuts: counts.completed().min().unwrap_or(0),
        at_floor: counts.completed().filter(|&c| c == floor).count() as u64,
        overflows: counts.overflows(),
        violation: counts
            .0
            .iter()
            .position(|c| matches!(c, Some(c) if *c < floor))
            .map(|i| i as u64),
    }
}
