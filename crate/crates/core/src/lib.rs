//! Lazy-bit rejection sampling.
//!
//! Uniform variates are revealed one bit at a time. For an increasing `f` on
//! `[0, 1]^n`, a [`engine::Strategy`] picks which coordinate to refine next
//! and [`engine::decide`] stops as soon as the revealed prefixes settle
//! whether `f(X) < X_{n+1}`. The [`analysis`] module evaluates the known
//! bounds on the expected number of revealed bits and checks them by
//! simulation and enumeration.

pub mod analysis;
pub mod bitsource;
pub mod engine;
pub mod error;
pub mod lazybox;
pub mod monofn;

pub use bitsource::{derive_trial_seed, BitSource, PseudoRandomBitSource, TapeBitSource};
pub use engine::{
    can_accept, can_reject, compare_to_constant, crosses, decide, refine, AltStrategy, DecisionOutcome, Limits,
    Sampler, Strategy, Verdict,
};
pub use error::{Error, Result};
pub use lazybox::{CutString, DyadicRational, FeasibleBox, LazyUniform};
pub use monofn::{Builtin, GridFunction, MonotoneOracle};
