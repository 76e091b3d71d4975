use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("tape value {0} is outside [0, 1)")]
    TapeOutOfRange(String),

    #[error("cut budget of {cap} exhausted without a verdict")]
    CutBudgetExceeded { cap: usize, state: String },

    #[error("coordinate {coord} reached the per-coordinate bit cap of {cap}")]
    BitCapExceeded { coord: usize, cap: u32, state: String },

    #[error("attempt budget of {cap} exhausted without an accepted sample")]
    AttemptBudgetExceeded { cap: u64 },

    #[error("invalid function spec `{spec}`: {reason}")]
    InvalidFunction { spec: String, reason: String },

    #[error("arity mismatch: function takes {expected} inputs, got {got}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("invalid rational `{0}`")]
    InvalidRational(String),

    #[error("unknown strategy `{0}`")]
    UnknownStrategy(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("expected count {expected:.3} in bin {bin} is below 5; use fewer bins")]
    SparseBin { bin: usize, expected: f64 },

    #[error("degenerate regression input: {0}")]
    DegenerateFit(String),
}

impl Error {
    /// Whether this error reports an exhausted budget rather than bad input.
    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            Error::CutBudgetExceeded { .. }
                | Error::BitCapExceeded { .. }
                | Error::AttemptBudgetExceeded { .. }
        )
    }
}
