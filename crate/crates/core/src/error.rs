use thiserror::Error;

/// Errors raised by validation, replay and the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AuctionError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: {what} (expected {expected}, got {got})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid value for {field}: {reason}")]
    InvalidValue { field: &'static str, reason: String },

    #[error("CTR model violates the {regime} regime: {reason}")]
    RegimeMismatch { regime: &'static str, reason: String },

    #[error("round {t} outside 0..{horizon}")]
    RoundOutOfRange { t: usize, horizon: usize },

    #[error("slot {slot} has zero slot factor but agent {agent} has impressions there")]
    DegenerateSlot { agent: usize, slot: usize },

    #[error("invalid allocation: {0}")]
    InvalidAllocation(String),

    #[error("more than {cap} breakpoints on the bid axis of agent {agent}; allocation looks degenerate")]
    SuspectedDegeneracy { agent: usize, cap: usize },

    #[error("influential set of round {t} has {size} pairs, above the enumeration cap {cap}")]
    CombinatorialBlowup { t: usize, size: usize, cap: usize },

    #[error("cannot fit a power law: {0}")]
    Fit(String),
}

pub type Result<T, E = AuctionError> = std::result::Result<T, E>;
