//! JSON scenario files.
//!
//! ```json
//! {
//!   "structure": {"states": [0, 1], "signals": ["h", "l"], "likelihood": [[0.2, 0.8], [0.8, 0.2]]},
//!   "prior": [0.5, 0.5],
//!   "eta": 0.5,
//!   "mode": "private",
//!   "horizon": 2000,
//!   "episodes": 500,
//!   "seed": 1,
//!   "convergence_tol": 0.1
//! }
//! ```
//!
//! `convergence_tol`, `true_state` and `belief_thin` are optional. Unknown
//! keys are rejected.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Belief, NoiseRate, SignalStructure};
use crate::simulation::{Mode, ScenarioConfig, DEFAULT_BELIEF_THIN, DEFAULT_CONVERGENCE_TOL};

fn default_tol() -> f64 {
    DEFAULT_CONVERGENCE_TOL
}

fn default_thin() -> usize {
    DEFAULT_BELIEF_THIN
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub structure: SignalStructure,
    pub prior: Belief,
    pub eta: NoiseRate,
    pub mode: Mode,
    pub horizon: usize,
    pub episodes: usize,
    pub seed: u64,
    #[serde(default = "default_tol")]
    pub convergence_tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub true_state: Option<usize>,
    #[serde(default = "default_thin")]
    pub belief_thin: usize,
}

impl Scenario {
    /// Parses and validates a scenario document.
    pub fn from_json(text: &str) -> Result<Self> {
        let scenario: Scenario =
            serde_json::from_str(text).map_err(|e| Error::ConfigInvalid(e.to_string()))?;
        scenario.to_config()?;
        Ok(scenario)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn to_config(&self) -> Result<ScenarioConfig> {
        let config = ScenarioConfig {
            structure: self.structure.clone(),
            prior: self.prior.clone(),
            eta: self.eta,
            mode: self.mode,
            horizon: self.horizon,
            episodes: self.episodes,
            seed: self.seed,
            convergence_tol: self.convergence_tol,
            true_state: self.true_state,
            belief_thin: self.belief_thin,
        };
        config.validate()?;
        Ok(config)
    }
}

impl From<&ScenarioConfig> for Scenario {
    fn from(c: &ScenarioConfig) -> Self {
        Self {
            structure: c.structure.clone(),
            prior: c.prior.clone(),
            eta: c.eta,
            mode: c.mode,
            horizon: c.horizon,
            episodes: c.episodes,
            seed: c.seed,
            convergence_tol: c.convergence_tol,
            true_state: c.true_state,
            belief_thin: c.belief_thin,
        }
    }
}
