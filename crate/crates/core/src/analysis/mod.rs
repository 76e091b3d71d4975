//! Bounds on expected bit cost and the tools that check them empirically.

pub mod bench;
pub mod bounds;
pub mod crossing;
pub mod stats;

pub use bench::{empirical_bits, empirical_threshold_bits, run_trials, verify_floor, BenchResult, FloorReport, TrialCounts};
pub use bounds::{
    decimals_for, format_fixed, format_significant, lower_bound, slack1_bound, slack2_bound, theorem1_bound, BoundReport, BoundRow, Enclosure,
};
pub use crossing::{count_crossed, count_crossed_oracle, prop1_bound, verify_prop1, Prop1Summary, Prop1Violation};
pub use stats::{bin_probabilities, chi_square_gof, fit_exponent, verify_tail_inequality, GofResult};
