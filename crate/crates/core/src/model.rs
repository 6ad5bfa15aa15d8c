//! Finite state and signal spaces, signal structures, beliefs and the
//! Bayesian update rules shared by both market modes.
//!
//! States are indexed by position in a [`StateSpace`] (ascending asset
//! value) and signals by position in a [`SignalSpace`]. All updates work in
//! plain probability space and renormalize on every step.
//!
//! The noise rate `eta` is the probability that the arriving trader is a
//! *noise* trader. A noise trader buys, sells or abstains with probability
//! one third each, so the likelihood of action `a` in state `w` is
//! `eta / 3 + (1 - eta) * f(S^a | w)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for probability normalization checks.
pub const PROB_TOL: f64 = 1e-12;
/// Tolerance for one-step algebraic identities (martingales, zero profit).
pub const IDENTITY_TOL: f64 = 1e-10;

/// Strictly increasing, finite set of asset values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct StateSpace {
    values: Vec<f64>,
}

impl StateSpace {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::TooFewStates(values.len()));
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() || (i > 0 && *v <= values[i - 1]) {
                return Err(Error::StatesNotIncreasing(i));
            }
        }
        Ok(Self { values })
    }

    /// States `0, 1, ..., n - 1`.
    pub fn integers(n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| i as f64).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, state: usize) -> f64 {
        self.values[state]
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }
}

impl TryFrom<Vec<f64>> for StateSpace {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<StateSpace> for Vec<f64> {
    fn from(space: StateSpace) -> Self {
        space.values
    }
}

/// Ordered signal labels. Position in the list is the signal order used by
/// the likelihood-ratio checks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct SignalSpace {
    labels: Vec<String>,
}

impl SignalSpace {
    pub fn new(labels: Vec<String>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptySignalSpace);
        }
        for (i, label) in labels.iter().enumerate() {
            if labels[..i].contains(label) {
                return Err(Error::DuplicateSignal(label.clone()));
            }
        }
        Ok(Self { labels })
    }

    /// Signals labelled `s1, ..., sm`.
    pub fn numbered(m: usize) -> Result<Self> {
        Self::new((1..=m).map(|i| format!("s{i}")).collect())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, signal: usize) -> &str {
        &self.labels[signal]
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownSignal(label.to_string()))
    }
}

impl TryFrom<Vec<String>> for SignalSpace {
    type Error = Error;

    fn try_from(labels: Vec<String>) -> Result<Self> {
        Self::new(labels)
    }
}

impl From<SignalSpace> for Vec<String> {
    fn from(space: SignalSpace) -> Self {
        space.labels
    }
}

/// Checks a likelihood table against its spaces: one row per state, one
/// column per signal, rows summing to one and every entry strictly positive.
pub fn validate_structure(
    states: &StateSpace,
    signals: &SignalSpace,
    likelihood: &[Vec<f64>],
) -> Result<()> {
    let (n, m) = (states.len(), signals.len());
    let bad_row = likelihood.iter().find(|row| row.len() != m);
    if likelihood.len() != n || bad_row.is_some() {
        return Err(Error::DimensionMismatch {
            rows: likelihood.len(),
            cols: bad_row.or(likelihood.first()).map_or(0, Vec::len),
            expected_rows: n,
            expected_cols: m,
        });
    }
    for (state, row) in likelihood.iter().enumerate() {
        for (signal, &value) in row.iter().enumerate() {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::NonPositiveDensity {
                    state,
                    signal,
                    value,
                });
            }
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > PROB_TOL {
            return Err(Error::RowSumInvalid { state, sum });
        }
    }
    Ok(())
}

/// The conditional likelihood table `f(s | w)` over finite spaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StructureDoc", into = "StructureDoc")]
pub struct SignalStructure {
    states: StateSpace,
    signals: SignalSpace,
    likelihood: Vec<Vec<f64>>,
}

/// JSON layout of a signal structure: `likelihood[i][j] = f(signals[j] | states[i])`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureDoc {
    pub states: Vec<f64>,
    pub signals: Vec<SignalLabel>,
    pub likelihood: Vec<Vec<f64>>,
}

/// Signal labels may be written as JSON strings or numbers.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SignalLabel {
    Text(String),
    Number(serde_json::Number),
}

impl SignalLabel {
    fn into_string(self) -> String {
        match self {
            SignalLabel::Text(s) => s,
            SignalLabel::Number(n) => n.to_string(),
        }
    }
}

impl TryFrom<StructureDoc> for SignalStructure {
    type Error = Error;

    fn try_from(doc: StructureDoc) -> Result<Self> {
        let states = StateSpace::new(doc.states)?;
        let signals = SignalSpace::new(
            doc.signals
                .into_iter()
                .map(SignalLabel::into_string)
                .collect(),
        )?;
        Self::new(states, signals, doc.likelihood)
    }
}

impl From<SignalStructure> for StructureDoc {
    fn from(s: SignalStructure) -> Self {
        StructureDoc {
            states: s.states.into(),
            signals: Vec::<String>::from(s.signals)
                .into_iter()
                .map(SignalLabel::Text)
                .collect(),
            likelihood: s.likelihood,
        }
    }
}

impl SignalStructure {
    pub fn new(
        states: StateSpace,
        signals: SignalSpace,
        likelihood: Vec<Vec<f64>>,
    ) -> Result<Self> {
        validate_structure(&states, &signals, &likelihood)?;
        Ok(Self {
            states,
            signals,
            likelihood,
        })
    }

    /// Integer states `0..n` and signals `s1..sm`.
    pub fn from_table(likelihood: Vec<Vec<f64>>) -> Result<Self> {
        let n = likelihood.len();
        let m = likelihood.first().map_or(0, Vec::len);
        Self::new(
            StateSpace::integers(n)?,
            SignalSpace::numbered(m)?,
            likelihood,
        )
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn states(&self) -> &StateSpace {
        &self.states
    }

    pub fn signals(&self) -> &SignalSpace {
        &self.signals
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_signals(&self) -> usize {
        self.signals.len()
    }

    pub fn likelihood(&self, state: usize, signal: usize) -> f64 {
        self.likelihood[state][signal]
    }

    pub fn row(&self, state: usize) -> &[f64] {
        &self.likelihood[state]
    }

    pub fn table(&self) -> &[Vec<f64>] {
        &self.likelihood
    }

    /// `f(S | w)` for a set of signals.
    pub fn set_likelihood(&self, state: usize, signals: &[usize]) -> f64 {
        signals.iter().map(|&s| self.likelihood[state][s]).sum()
    }

    /// Subjective signal probability `f(s | belief)`.
    pub fn signal_probability(&self, belief: &Belief, signal: usize) -> f64 {
        belief
            .weights()
            .iter()
            .zip(&self.likelihood)
            .map(|(mu, row)| mu * row[signal])
            .sum()
    }

    /// Posterior expectations `E[w | s]` for every signal under `belief`.
    pub fn posterior_values(&self, belief: &Belief) -> Vec<f64> {
        (0..self.num_signals())
            .map(|s| {
                let (mut num, mut den) = (0.0, 0.0);
                for (w, mu) in belief.weights().iter().enumerate() {
                    let p = mu * self.likelihood[w][s];
                    num += p * self.states.value(w);
                    den += p;
                }
                num / den
            })
            .collect()
    }

    fn check_signal(&self, signal: usize) -> Result<()> {
        if signal < self.num_signals() {
            Ok(())
        } else {
            Err(Error::UnknownSignal(signal.to_string()))
        }
    }
}

/// Probability distribution over the states of a [`StateSpace`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Belief {
    weights: Vec<f64>,
}

impl Belief {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidBelief("no states".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidBelief(format!(
                "weight {w} is not a probability"
            )));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > PROB_TOL {
            return Err(Error::InvalidBelief(format!("weights sum to {sum}")));
        }
        Ok(Self { weights })
    }

    /// Normalizes nonnegative weights with a positive total.
    pub fn from_unnormalized(weights: Vec<f64>) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if !(sum.is_finite() && sum > 0.0) || weights.iter().any(|w| *w < 0.0) {
            return Err(Error::InvalidBelief(format!(
                "cannot normalize weights summing to {sum}"
            )));
        }
        Self::new(weights.into_iter().map(|w| w / sum).collect())
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            weights: vec![1.0 / n as f64; n],
        }
    }

    pub fn degenerate(n: usize, state: usize) -> Self {
        let mut weights = vec![0.0; n];
        weights[state] = 1.0;
        Self { weights }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn get(&self, state: usize) -> f64 {
        self.weights[state]
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn is_full_support(&self) -> bool {
        self.weights.iter().all(|w| *w > 0.0)
    }

    /// Largest absolute coordinate difference.
    pub fn distance(&self, other: &Belief) -> f64 {
        self.weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Multiplies by a per-state likelihood and renormalizes. A likelihood
    /// with zero total mass under this belief leaves the belief unchanged.
    pub(crate) fn reweight(&self, likelihood: impl Fn(usize) -> f64) -> Belief {
        let unnormalized: Vec<f64> = self
            .weights
            .iter()
            .enumerate()
            .map(|(w, mu)| mu * likelihood(w))
            .collect();
        let total: f64 = unnormalized.iter().sum();
        if total <= 0.0 {
            return self.clone();
        }
        let weights: Vec<f64> = unnormalized.into_iter().map(|p| p / total).collect();
        debug_assert!((weights.iter().sum::<f64>() - 1.0).abs() <= PROB_TOL);
        Belief { weights }
    }

    pub(crate) fn check_len(&self, n: usize) -> Result<()> {
        if self.weights.len() == n {
            Ok(())
        } else {
            Err(Error::InvalidBelief(format!(
                "belief has {} weights for {n} states",
                self.weights.len()
            )))
        }
    }
}

impl TryFrom<Vec<f64>> for Belief {
    type Error = Error;

    fn try_from(weights: Vec<f64>) -> Result<Self> {
        Self::new(weights)
    }
}

impl From<Belief> for Vec<f64> {
    fn from(belief: Belief) -> Self {
        belief.weights
    }
}

/// Probability that the arriving trader is a noise trader.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct NoiseRate(f64);

impl NoiseRate {
    pub fn new(eta: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&eta) {
            Ok(Self(eta))
        } else {
            Err(Error::InvalidNoiseRate(eta))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Probability that a noise trader picks any given action.
    pub fn per_action(self) -> f64 {
        self.0 / 3.0
    }

    pub fn informed(self) -> f64 {
        1.0 - self.0
    }

    pub fn is_pure_noise(self) -> bool {
        self.0 >= 1.0
    }
}

impl TryFrom<f64> for NoiseRate {
    type Error = Error;

    fn try_from(eta: f64) -> Result<Self> {
        Self::new(eta)
    }
}

impl From<NoiseRate> for f64 {
    fn from(eta: NoiseRate) -> Self {
        eta.0
    }
}

/// A trader's action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Action {
    #[serde(rename = "B")]
    Buy,
    #[serde(rename = "S")]
    Sell,
    #[serde(rename = "NT")]
    NoTrade,
}

impl Action {
    pub const ALL: [Action; 3] = [Action::Buy, Action::Sell, Action::NoTrade];

    pub fn symbol(self) -> &'static str {
        match self {
            Action::Buy => "B",
            Action::Sell => "S",
            Action::NoTrade => "NT",
        }
    }
}

/// Assignment of every signal to the action it induces under current quotes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignalPartition {
    assignment: Vec<Action>,
}

impl SignalPartition {
    pub fn new(assignment: Vec<Action>) -> Self {
        Self { assignment }
    }

    pub fn all_no_trade(m: usize) -> Self {
        Self::new(vec![Action::NoTrade; m])
    }

    pub fn assignment(&self) -> &[Action] {
        &self.assignment
    }

    pub fn action_of(&self, signal: usize) -> Action {
        self.assignment[signal]
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    /// Signals assigned to `action`, in signal order.
    pub fn cell(&self, action: Action) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|(_, a)| **a == action)
            .map(|(s, _)| s)
            .collect()
    }

    pub fn is_all_no_trade(&self) -> bool {
        self.assignment.iter().all(|a| *a == Action::NoTrade)
    }
}

/// Bayes update on a single observed signal.
pub fn bayes_posterior(
    belief: &Belief,
    structure: &SignalStructure,
    signal: usize,
) -> Result<Belief> {
    structure.check_signal(signal)?;
    belief.check_len(structure.num_states())?;
    Ok(belief.reweight(|w| structure.likelihood(w, signal)))
}

/// Bayes update on the event "the signal lies in `signals`".
pub fn bayes_posterior_set(
    belief: &Belief,
    structure: &SignalStructure,
    signals: &[usize],
) -> Result<Belief> {
    if signals.is_empty() {
        return Err(Error::EmptySignalSet);
    }
    for &s in signals {
        structure.check_signal(s)?;
    }
    belief.check_len(structure.num_states())?;
    let mut unique = signals.to_vec();
    unique.sort_unstable();
    unique.dedup();
    Ok(belief.reweight(|w| structure.set_likelihood(w, &unique)))
}

/// `E[w]` under `belief`.
pub fn expectation(states: &StateSpace, belief: &Belief) -> f64 {
    let e: f64 = states
        .values()
        .iter()
        .zip(belief.weights())
        .map(|(v, mu)| v * mu)
        .sum();
    e.clamp(states.min(), states.max())
}

/// `f(a | w, H) = eta / 3 + (1 - eta) f(S^a | w)`.
pub fn action_likelihood(
    structure: &SignalStructure,
    partition: &SignalPartition,
    eta: NoiseRate,
    action: Action,
    state: usize,
) -> f64 {
    let informed: f64 = partition
        .assignment()
        .iter()
        .zip(structure.row(state))
        .filter(|(a, _)| **a == action)
        .map(|(_, f)| f)
        .sum();
    eta.per_action() + eta.informed() * informed
}

/// Unconditional probability of `action` under the public belief.
pub fn action_probability(
    belief: &Belief,
    structure: &SignalStructure,
    partition: &SignalPartition,
    eta: NoiseRate,
    action: Action,
) -> f64 {
    belief
        .weights()
        .iter()
        .enumerate()
        .map(|(w, mu)| mu * action_likelihood(structure, partition, eta, action, w))
        .sum()
}

/// Public-belief update after the market maker observes `action`.
///
/// An action that has probability zero under `belief` leaves it unchanged.
pub fn update_public_belief_on_action(
    belief: &Belief,
    structure: &SignalStructure,
    partition: &SignalPartition,
    eta: NoiseRate,
    action: Action,
) -> Belief {
    belief.reweight(|w| action_likelihood(structure, partition, eta, action, w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn table1_validates() {
        let s = fixtures::table1();
        assert_eq!(s.num_states(), 4);
        assert_eq!(s.num_signals(), 4);
    }

    #[test]
    fn row_sum_error_names_state() {
        let err = SignalStructure::from_table(vec![vec![0.5, 0.5], vec![0.5, 0.4]]).unwrap_err();
        assert!(matches!(err, Error::RowSumInvalid { state: 1, .. }));
    }

    #[test]
    fn zero_entry_rejected() {
        let err = SignalStructure::from_table(vec![vec![1.0, 0.0], vec![0.5, 0.5]]).unwrap_err();
        assert!(matches!(
            err,
            Error::NonPositiveDensity {
                state: 0,
                signal: 1,
                ..
            }
        ));
    }

    #[test]
    fn ragged_table_rejected() {
        let states = StateSpace::integers(2).unwrap();
        let signals = SignalSpace::numbered(2).unwrap();
        let err = validate_structure(&states, &signals, &[vec![0.5, 0.5], vec![1.0]]).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
        let err = validate_structure(&states, &signals, &[vec![0.5, 0.5]]).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn state_space_rejects_unordered_values() {
        assert!(matches!(
            StateSpace::new(vec![0.0]),
            Err(Error::TooFewStates(1))
        ));
        assert!(matches!(
            StateSpace::new(vec![0.0, 2.0, 1.0]),
            Err(Error::StatesNotIncreasing(2))
        ));
        assert!(StateSpace::new(vec![0.0, f64::NAN]).is_err());
    }

    #[test]
    fn table1_posterior_on_first_signal() {
        let s = fixtures::table1();
        let post = bayes_posterior(&Belief::uniform(4), &s, 0).unwrap();
        assert!(close(post.weights(), &[0.3, 0.1, 0.4, 0.2], 1e-12));
    }

    #[test]
    fn binary_posterior_on_high_signal() {
        let s = fixtures::binary();
        let post = bayes_posterior(&Belief::uniform(2), &s, 0).unwrap();
        assert!(close(post.weights(), &[0.2, 0.8], 1e-12));
    }

    #[test]
    fn row_constant_structure_is_uninformative() {
        let s = fixtures::row_constant();
        let prior = Belief::new(vec![0.1, 0.2, 0.7]).unwrap();
        for sig in 0..s.num_signals() {
            let post = bayes_posterior(&prior, &s, sig).unwrap();
            assert!(close(post.weights(), prior.weights(), 1e-15));
        }
    }

    #[test]
    fn unknown_signal_rejected() {
        let s = fixtures::binary();
        assert!(matches!(
            bayes_posterior(&Belief::uniform(2), &s, 2),
            Err(Error::UnknownSignal(_))
        ));
        assert!(matches!(
            bayes_posterior_set(&Belief::uniform(2), &s, &[0, 5]),
            Err(Error::UnknownSignal(_))
        ));
    }

    #[test]
    fn set_posterior_cases() {
        let s = fixtures::table1();
        let prior = Belief::uniform(4);
        let whole = bayes_posterior_set(&prior, &s, &[0, 1, 2, 3]).unwrap();
        assert!(close(whole.weights(), prior.weights(), 1e-15));
        // Columns s1 + s2 sum to 0.5 in every row of the table1 fixture.
        let pair = bayes_posterior_set(&prior, &s, &[0, 1]).unwrap();
        assert!(close(pair.weights(), prior.weights(), 1e-15));
        let single = bayes_posterior_set(&prior, &s, &[2]).unwrap();
        assert_eq!(single, bayes_posterior(&prior, &s, 2).unwrap());
        assert!(matches!(
            bayes_posterior_set(&prior, &s, &[]),
            Err(Error::EmptySignalSet)
        ));
    }

    #[test]
    fn expectation_cases() {
        let s = fixtures::table1();
        assert!((expectation(s.states(), &Belief::uniform(4)) - 1.5).abs() < 1e-15);
        assert_eq!(expectation(s.states(), &Belief::degenerate(4, 2)), 2.0);
        let b = fixtures::binary();
        let e = expectation(b.states(), &Belief::new(vec![0.2, 0.8]).unwrap());
        assert!((e - 0.8).abs() < 1e-15);
    }

    #[test]
    fn action_likelihood_cases() {
        let s = fixtures::binary();
        let partition = SignalPartition::new(vec![Action::Buy, Action::Sell]);
        for a in Action::ALL {
            for w in 0..2 {
                let l = action_likelihood(&s, &partition, NoiseRate::new(1.0).unwrap(), a, w);
                assert!((l - 1.0 / 3.0).abs() < 1e-15);
            }
        }
        let half = NoiseRate::new(0.5).unwrap();
        let l = action_likelihood(&s, &partition, half, Action::Buy, 1);
        assert!((l - (0.5 / 3.0 + 0.4)).abs() < 1e-15);
        let all_buy = SignalPartition::new(vec![Action::Buy, Action::Buy]);
        let l = action_likelihood(&s, &all_buy, NoiseRate::new(0.0).unwrap(), Action::Buy, 0);
        assert!((l - 1.0).abs() < 1e-15);
    }

    #[test]
    fn action_likelihoods_sum_to_one() {
        let s = fixtures::table1();
        let partition = SignalPartition::new(vec![
            Action::Buy,
            Action::NoTrade,
            Action::Sell,
            Action::Buy,
        ]);
        let eta = NoiseRate::new(0.3).unwrap();
        for w in 0..4 {
            let total: f64 = Action::ALL
                .iter()
                .map(|&a| action_likelihood(&s, &partition, eta, a, w))
                .sum();
            assert!((total - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn public_update_cases() {
        let s = fixtures::binary();
        let prior = Belief::uniform(2);
        let partition = SignalPartition::new(vec![Action::Buy, Action::Sell]);
        let half = NoiseRate::new(0.5).unwrap();
        let after_buy = update_public_belief_on_action(&prior, &s, &partition, half, Action::Buy);
        assert!(close(after_buy.weights(), &[0.32, 0.68], 1e-12));
        let after_nt =
            update_public_belief_on_action(&prior, &s, &partition, half, Action::NoTrade);
        assert!(close(after_nt.weights(), prior.weights(), 1e-15));
        let pure = NoiseRate::new(1.0).unwrap();
        let skewed = Belief::new(vec![0.9, 0.1]).unwrap();
        for a in Action::ALL {
            let b = update_public_belief_on_action(&skewed, &s, &partition, pure, a);
            assert!(close(b.weights(), skewed.weights(), 1e-15));
        }
    }

    #[test]
    fn structure_json_layout() {
        let text = r#"{"states":[0,1],"signals":["h",2],"likelihood":[[0.2,0.8],[0.8,0.2]]}"#;
        let s = SignalStructure::from_json(text).unwrap();
        assert_eq!(s.signals().labels(), &["h".to_string(), "2".to_string()]);
        assert!(SignalStructure::from_json(
            r#"{"states":[0,1],"signals":["a"],"likelihood":[[1.0],[0.9]]}"#
        )
        .is_err());
        let back: SignalStructure =
            serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn noise_rate_bounds() {
        assert!(NoiseRate::new(-0.1).is_err());
        assert!(NoiseRate::new(1.1).is_err());
        assert!(NoiseRate::new(f64::NAN).is_err());
        assert!(NoiseRate::new(1.0).unwrap().is_pure_noise());
    }

    #[test]
    fn belief_validation() {
        assert!(Belief::new(vec![0.5, 0.6]).is_err());
        assert!(Belief::new(vec![-0.1, 1.1]).is_err());
        assert!(!Belief::degenerate(3, 1).is_full_support());
        assert!(Belief::uniform(3).is_full_support());
        let b = Belief::from_unnormalized(vec![1.0, 3.0]).unwrap();
        assert_eq!(b.weights(), &[0.25, 0.75]);
    }
}
