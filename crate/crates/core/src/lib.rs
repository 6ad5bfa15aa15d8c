//! Observational learning in sequential-trade markets with competitive
//! bid and ask quotes.
//!
//! Traders arrive one at a time. With probability `eta` the trader is a
//! noise trader who buys, sells or abstains uniformly at random; otherwise
//! the trader holds a private signal drawn from `f(s | w)` and trades on it
//! against zero-profit quotes. Market makers update a public belief from
//! the observed actions ([`market`]) or, in the public-signal benchmark,
//! from the signals themselves ([`simulation::Mode::Public`]).
//!
//! The crate provides:
//!
//! - [`model`]: spaces, signal structures, beliefs and Bayes updates;
//! - [`market`]: the quote solver, signal partition and state transition;
//! - [`conditions`]: pairwise informativeness, MLRP, cascade beliefs and an
//!   audit of the Avery-Zemsky condition;
//! - [`simulation`]: episode and Monte Carlo drivers for both market modes;
//! - [`verification`]: exact one-step martingale and direction checks plus
//!   a statistical limit-belief check;
//! - [`scenario`]: the JSON scenario schema used by the CLI.
//!
//! `eta` is always the noise probability.

pub mod conditions;
pub mod error;
pub mod fixtures;
pub mod market;
pub mod model;
pub mod scenario;
pub mod simulation;
pub mod verification;

pub use conditions::{AzcAuditConfig, AzcAuditReport, CascadeBeliefSet, ConditionReport, Witness};
pub use error::{Error, Result};
pub use market::{MarketState, QuoteSolution, Quotes};
pub use model::{
    Action, Belief, NoiseRate, SignalPartition, SignalSpace, SignalStructure, StateSpace,
};
pub use scenario::Scenario;
pub use simulation::{EpisodeResult, Mode, ModeComparison, MonteCarloSummary, ScenarioConfig};
pub use verification::DeviationReport;
