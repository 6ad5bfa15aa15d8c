//! Episode and Monte Carlo drivers for the private-signal and
//! public-signal markets.
//!
//! Episode `i` of a run seeded with `seed` draws from
//! `ChaCha8Rng::seed_from_u64(seed)` on stream `i`, so results do not depend
//! on how episodes are spread over threads. Each period consumes the same
//! three uniforms in both modes (noise arrival, noise action, signal), which
//! lets [`compare_modes`] run both markets on identical draws.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{informative_action, step_market, MarketState};
use crate::model::{bayes_posterior, expectation, Action, Belief, NoiseRate, SignalStructure};

/// Default convergence tolerance `|p_T - w*|` for "the market learned".
pub const DEFAULT_CONVERGENCE_TOL: f64 = 0.1;
/// Default thinning of persisted belief paths.
pub const DEFAULT_BELIEF_THIN: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Market makers observe only the action history.
    Private,
    /// Each informed trader's signal is revealed to the market.
    Public,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "private" => Ok(Mode::Private),
            "public" => Ok(Mode::Public),
            other => Err(Error::ConfigInvalid(format!("unknown mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub structure: SignalStructure,
    pub prior: Belief,
    pub eta: NoiseRate,
    pub mode: Mode,
    pub horizon: usize,
    pub episodes: usize,
    pub seed: u64,
    pub convergence_tol: f64,
    /// Fixes the true state instead of drawing it from the prior.
    pub true_state: Option<usize>,
    /// Keep every k-th belief in persisted paths.
    pub belief_thin: usize,
}

impl ScenarioConfig {
    pub fn new(structure: SignalStructure, prior: Belief, eta: NoiseRate, mode: Mode) -> Self {
        Self {
            structure,
            prior,
            eta,
            mode,
            horizon: 1000,
            episodes: 100,
            seed: 0,
            convergence_tol: DEFAULT_CONVERGENCE_TOL,
            true_state: None,
            belief_thin: DEFAULT_BELIEF_THIN,
        }
    }

    pub fn with_horizon(mut self, horizon: usize) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn with_episodes(mut self, episodes: usize) -> Self {
        self.episodes = episodes;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.structure.num_states();
        if self.prior.len() != n {
            return Err(Error::ConfigInvalid(format!(
                "prior has {} weights for {n} states",
                self.prior.len()
            )));
        }
        if !self.prior.is_full_support() {
            return Err(Error::ConfigInvalid("prior must have full support".into()));
        }
        if self.horizon == 0 {
            return Err(Error::ConfigInvalid("horizon must be at least 1".into()));
        }
        if self.episodes == 0 {
            return Err(Error::ConfigInvalid("episodes must be at least 1".into()));
        }
        if !(self.convergence_tol.is_finite() && self.convergence_tol > 0.0) {
            return Err(Error::ConfigInvalid(
                "convergence_tol must be positive".into(),
            ));
        }
        if self.belief_thin == 0 {
            return Err(Error::ConfigInvalid(
                "belief_thin must be at least 1".into(),
            ));
        }
        if let Some(w) = self.true_state {
            if w >= n {
                return Err(Error::ConfigInvalid(format!("true_state {w} out of range")));
            }
        }
        Ok(())
    }
}

/// Outcome of one simulated market.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub episode: usize,
    pub true_state: usize,
    /// Prices `p_0..=p_T`; `p_0` is the prior expectation.
    pub price_path: Vec<f64>,
    /// Public beliefs `mu_0..=mu_T` at full resolution.
    pub belief_path: Vec<Belief>,
    /// First period whose partition is all no-trade (private mode only).
    pub cascade_time: Option<usize>,
    pub final_belief_on_truth: f64,
}

impl EpisodeResult {
    pub fn final_price(&self) -> f64 {
        *self.price_path.last().expect("price path is never empty")
    }

    pub fn price_error(&self, structure: &SignalStructure) -> f64 {
        (self.final_price() - structure.states().value(self.true_state)).abs()
    }

    pub fn learned(&self, structure: &SignalStructure, tol: f64) -> bool {
        self.price_error(structure) < tol
    }

    /// `(period, belief)` pairs for every `thin`-th period plus the last.
    pub fn thinned_beliefs(&self, thin: usize) -> Vec<(usize, &Belief)> {
        let last = self.belief_path.len() - 1;
        self.belief_path
            .iter()
            .enumerate()
            .filter(|(t, _)| t % thin.max(1) == 0 || *t == last)
            .collect()
    }
}

/// The random inputs of one period, shared by both market modes.
#[derive(Debug, Clone, Copy, PartialEq)]
struct PeriodDraw {
    noise: bool,
    noise_action: Action,
    signal: usize,
}

fn sample_index(weights: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    // Rounding left the cumulative sum just short of one.
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
}

struct EpisodeDraws {
    rng: ChaCha8Rng,
    true_state: usize,
}

impl EpisodeDraws {
    fn new(config: &ScenarioConfig, episode: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(episode as u64);
        let drawn = sample_index(config.prior.weights(), rng.random::<f64>());
        Self {
            rng,
            true_state: config.true_state.unwrap_or(drawn),
        }
    }

    fn next(&mut self, structure: &SignalStructure, eta: NoiseRate) -> PeriodDraw {
        let u_noise: f64 = self.rng.random();
        let u_action: f64 = self.rng.random();
        let u_signal: f64 = self.rng.random();
        PeriodDraw {
            noise: u_noise < eta.value(),
            noise_action: Action::ALL[((u_action * 3.0) as usize).min(2)],
            signal: sample_index(structure.row(self.true_state), u_signal),
        }
    }
}

fn ensure_mode(config: &ScenarioConfig, mode: Mode) -> Result<()> {
    config.validate()?;
    if config.mode != mode {
        return Err(Error::ConfigInvalid(format!(
            "scenario mode is {:?}, expected {mode:?}",
            config.mode
        )));
    }
    Ok(())
}

pub fn run_private_episode(config: &ScenarioConfig, episode: usize) -> Result<EpisodeResult> {
    ensure_mode(config, Mode::Private)?;
    private_episode(config, episode)
}

fn private_episode(config: &ScenarioConfig, episode: usize) -> Result<EpisodeResult> {
    let structure = &config.structure;
    let eta = config.eta;
    let mut draws = EpisodeDraws::new(config, episode);
    let mut state = MarketState::new(config.prior.clone(), structure, eta)?;

    let mut price_path = Vec::with_capacity(config.horizon + 1);
    let mut belief_path = Vec::with_capacity(config.horizon + 1);
    let mut cascade_time = None;
    for t in 0..=config.horizon {
        if cascade_time.is_none() && state.in_cascade() {
            cascade_time = Some(t);
            // Bid and ask both sit at the public expectation from here on.
            state.price = state.expectation(structure);
        }
        price_path.push(state.price);
        belief_path.push(state.belief.clone());
        if t == config.horizon {
            break;
        }
        if cascade_time.is_some() {
            // Absorbing: no action carries information.
            continue;
        }
        let draw = draws.next(structure, eta);
        let action = if draw.noise {
            draw.noise_action
        } else {
            let private = bayes_posterior(&state.belief, structure, draw.signal)?;
            informative_action(expectation(structure.states(), &private), state.quotes)
        };
        state = step_market(&state, structure, eta, action)?;
    }
    Ok(finish(
        episode,
        draws.true_state,
        price_path,
        belief_path,
        cascade_time,
    ))
}

pub fn run_public_episode(config: &ScenarioConfig, episode: usize) -> Result<EpisodeResult> {
    ensure_mode(config, Mode::Public)?;
    public_episode(config, episode)
}

fn public_episode(config: &ScenarioConfig, episode: usize) -> Result<EpisodeResult> {
    let structure = &config.structure;
    let mut draws = EpisodeDraws::new(config, episode);
    let mut belief = config.prior.clone();
    let mut price_path = Vec::with_capacity(config.horizon + 1);
    let mut belief_path = Vec::with_capacity(config.horizon + 1);
    price_path.push(expectation(structure.states(), &belief));
    belief_path.push(belief.clone());
    for _ in 0..config.horizon {
        let draw = draws.next(structure, config.eta);
        if !draw.noise {
            belief = bayes_posterior(&belief, structure, draw.signal)?;
        }
        price_path.push(expectation(structure.states(), &belief));
        belief_path.push(belief.clone());
    }
    Ok(finish(
        episode,
        draws.true_state,
        price_path,
        belief_path,
        None,
    ))
}

fn finish(
    episode: usize,
    true_state: usize,
    price_path: Vec<f64>,
    belief_path: Vec<Belief>,
    cascade_time: Option<usize>,
) -> EpisodeResult {
    let final_belief_on_truth = belief_path.last().map_or(0.0, |b| b.get(true_state));
    EpisodeResult {
        episode,
        true_state,
        price_path,
        belief_path,
        cascade_time,
        final_belief_on_truth,
    }
}

/// Runs one episode in the scenario's mode.
pub fn run_episode(config: &ScenarioConfig, episode: usize) -> Result<EpisodeResult> {
    config.validate()?;
    match config.mode {
        Mode::Private => private_episode(config, episode),
        Mode::Public => public_episode(config, episode),
    }
}

/// Runs every episode of the scenario, in parallel, in episode order.
pub fn run_episodes(config: &ScenarioConfig) -> Result<Vec<EpisodeResult>> {
    config.validate()?;
    (0..config.episodes)
        .into_par_iter()
        .map(|i| run_episode(config, i))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSummary {
    pub state: usize,
    pub value: f64,
    pub episodes: usize,
    pub learned_fraction: f64,
    pub mean_abs_price_error: f64,
    pub mean_final_belief_on_truth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSummary {
    pub mode: Mode,
    pub episodes: usize,
    pub horizon: usize,
    pub convergence_tol: f64,
    /// Fraction of episodes with `|p_T - w*| < convergence_tol`.
    pub learned_fraction: f64,
    pub mean_abs_price_error: f64,
    pub mean_final_belief_on_truth: f64,
    pub cascade_fraction: f64,
    pub per_state: Vec<StateSummary>,
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

/// Aggregates episode results into convergence statistics.
pub fn summarize(config: &ScenarioConfig, results: &[EpisodeResult]) -> MonteCarloSummary {
    let structure = &config.structure;
    let tol = config.convergence_tol;
    let indicator = |b: bool| if b { 1.0 } else { 0.0 };
    let per_state = (0..structure.num_states())
        .map(|w| {
            let of_state: Vec<&EpisodeResult> =
                results.iter().filter(|r| r.true_state == w).collect();
            StateSummary {
                state: w,
                value: structure.states().value(w),
                episodes: of_state.len(),
                learned_fraction: mean(
                    of_state
                        .iter()
                        .map(|r| indicator(r.learned(structure, tol))),
                ),
                mean_abs_price_error: mean(of_state.iter().map(|r| r.price_error(structure))),
                mean_final_belief_on_truth: mean(of_state.iter().map(|r| r.final_belief_on_truth)),
            }
        })
        .collect();
    MonteCarloSummary {
        mode: config.mode,
        episodes: results.len(),
        horizon: config.horizon,
        convergence_tol: tol,
        learned_fraction: mean(results.iter().map(|r| indicator(r.learned(structure, tol)))),
        mean_abs_price_error: mean(results.iter().map(|r| r.price_error(structure))),
        mean_final_belief_on_truth: mean(results.iter().map(|r| r.final_belief_on_truth)),
        cascade_fraction: mean(results.iter().map(|r| indicator(r.cascade_time.is_some()))),
        per_state,
    }
}

pub fn run_monte_carlo(config: &ScenarioConfig) -> Result<MonteCarloSummary> {
    let results = run_episodes(config)?;
    Ok(summarize(config, &results))
}

/// Both market modes run on identical per-episode draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeComparison {
    pub private: MonteCarloSummary,
    pub public: MonteCarloSummary,
    /// Three standard errors of the difference in learned fractions.
    pub slack: f64,
    /// `public.learned_fraction >= private.learned_fraction - slack`.
    pub nesting_holds: bool,
}

pub fn compare_modes(config: &ScenarioConfig) -> Result<ModeComparison> {
    config.validate()?;
    let private = run_monte_carlo(&config.clone().with_mode(Mode::Private))?;
    let public = run_monte_carlo(&config.clone().with_mode(Mode::Public))?;
    let n = config.episodes as f64;
    let var = |p: f64| p * (1.0 - p);
    let slack =
        3.0 * ((var(private.learned_fraction) + var(public.learned_fraction)) / n).sqrt() + 1.0 / n;
    let nesting_holds = public.learned_fraction >= private.learned_fraction - slack;
    Ok(ModeComparison {
        private,
        public,
        slack,
        nesting_holds,
    })
}
