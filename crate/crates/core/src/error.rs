use thiserror::Error;

/// Errors raised by the market model, condition checkers and drivers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("state space needs at least two states, got {0}")]
    TooFewStates(usize),
    #[error("state values must be finite and strictly increasing (index {0})")]
    StatesNotIncreasing(usize),
    #[error("signal space must not be empty")]
    EmptySignalSpace,
    #[error("duplicate signal label `{0}`")]
    DuplicateSignal(String),
    #[error("likelihood table has shape {rows}x{cols}, expected {expected_rows}x{expected_cols}")]
    DimensionMismatch {
        rows: usize,
        cols: usize,
        expected_rows: usize,
        expected_cols: usize,
    },
    #[error("likelihood row for state {state} sums to {sum}, expected 1")]
    RowSumInvalid { state: usize, sum: f64 },
    #[error("likelihood f(signal {signal} | state {state}) = {value} is not strictly positive and finite")]
    NonPositiveDensity {
        state: usize,
        signal: usize,
        value: f64,
    },
    #[error("belief is invalid: {0}")]
    InvalidBelief(String),
    #[error("noise rate {0} is outside [0, 1]")]
    InvalidNoiseRate(f64),
    #[error("unknown signal {0}")]
    UnknownSignal(String),
    #[error("unknown state {0}")]
    UnknownState(usize),
    #[error("signal set is empty")]
    EmptySignalSet,
    #[error("states {0} and {1} have identical signal distributions")]
    NotPairwiseInformative(usize, usize),
    #[error("target expectation {c} lies outside [{low}, {high}]")]
    OutOfHull { c: f64, low: f64, high: f64 },
    #[error("no partition is consistent with zero-profit quotes")]
    NoConsistentPartition,
    #[error("belief puts zero mass on state {0}")]
    DegenerateBelief(usize),
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
