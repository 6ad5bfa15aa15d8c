//! Private-signal market mechanism: zero-profit quotes, the induced signal
//! partition, the informed trader's decision rule and the one-period
//! transition of the public state.
//!
//! # Quote selection
//!
//! Let `v_s = E[w | s, H]`. A buy set `S^B` is consistent with an ask if it
//! contains exactly the signals with `v_s > ask`, so only "top-k" sets in
//! descending `v_s` order qualify. For each `k` the zero-profit ask is the
//! conditional expectation given a buy,
//!
//! ```text
//! ask_k = (eta/3 * E[w] + (1 - eta) * sum_{top k} v_s f(s)) / (eta/3 + (1 - eta) * sum_{top k} f(s))
//! ```
//!
//! and `k` is accepted when every included `v_s > ask_k >= ` every excluded
//! `v_s`. Among accepted `k` the largest buy set (lowest ask) wins; the bid
//! side mirrors this on ascending order and keeps the highest bid. Signals
//! whose value equals a quote do not trade.
//!
//! Because `ask_{k+1}` is a weighted average of `ask_k` and `v_{k+1}`, the
//! sequence `ask_k` rises strictly up to its peak and is non-increasing
//! afterwards, so with `eta > 0` exactly one `k` is consistent. The count
//! of consistent candidates is still reported.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    action_likelihood, action_probability, expectation, update_public_belief_on_action, Action,
    Belief, NoiseRate, SignalPartition, SignalStructure,
};

/// Bid and ask prices posted by the competitive market makers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quotes {
    pub bid: f64,
    pub ask: f64,
}

impl Quotes {
    pub fn spread(&self) -> f64 {
        self.ask - self.bid
    }
}

/// Solved quotes with the partition they induce.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuoteSolution {
    pub quotes: Quotes,
    pub partition: SignalPartition,
    /// Number of buy-set sizes consistent with their own ask.
    pub consistent_buy_sets: usize,
    /// Number of sell-set sizes consistent with their own bid.
    pub consistent_sell_sets: usize,
}

/// Values within this relative distance of a quote count as ties.
pub const TIE_TOL: f64 = 1e-12;

fn tie_band(quote: f64) -> f64 {
    TIE_TOL * (1.0 + quote.abs())
}

fn strictly_above(value: f64, quote: f64) -> bool {
    value > quote + tie_band(quote)
}

fn strictly_below(value: f64, quote: f64) -> bool {
    value < quote - tie_band(quote)
}

/// Informed trader's rule: buy above the ask, sell below the bid, otherwise
/// stay out. Ties (up to [`TIE_TOL`]) do not trade.
pub fn informative_action(posterior_value: f64, quotes: Quotes) -> Action {
    if strictly_above(posterior_value, quotes.ask) {
        Action::Buy
    } else if strictly_below(posterior_value, quotes.bid) {
        Action::Sell
    } else {
        Action::NoTrade
    }
}

pub fn solve_quotes(
    belief: &Belief,
    structure: &SignalStructure,
    eta: NoiseRate,
) -> Result<(Quotes, SignalPartition)> {
    let sol = solve_quotes_detailed(belief, structure, eta)?;
    Ok((sol.quotes, sol.partition))
}

#[derive(Clone, Copy)]
enum Side {
    Ask,
    Bid,
}

/// One side of the quote problem. `order` lists signals from most to least
/// aggressive for this side; returns `(quote, k, consistent_count)`.
fn solve_side(
    side: Side,
    order: &[usize],
    values: &[f64],
    probs: &[f64],
    mean: f64,
    eta: NoiseRate,
) -> Option<(f64, usize, usize)> {
    let noise = eta.per_action();
    let informed = eta.informed();
    let beyond = |v: f64, q: f64| match side {
        Side::Ask => strictly_above(v, q),
        Side::Bid => strictly_below(v, q),
    };

    let mut quotes = Vec::with_capacity(order.len() + 1);
    let (mut num, mut den) = (noise * mean, noise);
    for k in 0..=order.len() {
        if k > 0 {
            let s = order[k - 1];
            num += informed * values[s] * probs[s];
            den += informed * probs[s];
        }
        quotes.push(if den > 0.0 {
            num / den
        } else {
            // eta = 0 with an empty set: any quote no informed trader
            // crosses satisfies zero profit; take the tightest one.
            order.first().map_or(mean, |&s| values[s])
        });
    }

    let mut chosen = None;
    let mut consistent = 0;
    for (k, &quote) in quotes.iter().enumerate() {
        let included_ok = order[..k].iter().all(|&s| beyond(values[s], quote));
        let excluded_ok = order[k..].iter().all(|&s| !beyond(values[s], quote));
        if included_ok && excluded_ok {
            consistent += 1;
            chosen = Some((quote, k));
        }
    }
    if let Some((q, k)) = chosen {
        return Some((q, k, consistent));
    }
    // Rounding can leave the peak signal a hair inside its own quote. Fall
    // back to the peak of the quote sequence: keep adding signals while the
    // next one still lies beyond the current quote.
    let mut k = 0;
    while k < order.len()
        && beyond(values[order[k]], quotes[k])
        && beyond(values[order[k]], quotes[k + 1])
    {
        k += 1;
    }
    (den > 0.0 || k > 0).then_some((quotes[k], k, 0))
}

/// Solves both zero-profit quotes and the induced partition.
pub fn solve_quotes_detailed(
    belief: &Belief,
    structure: &SignalStructure,
    eta: NoiseRate,
) -> Result<QuoteSolution> {
    belief
        .check_len(structure.num_states())
        .map_err(|e| Error::InvalidBelief(e.to_string()))?;
    let m = structure.num_signals();
    let mean = expectation(structure.states(), belief);
    if eta.is_pure_noise() {
        return Ok(QuoteSolution {
            quotes: Quotes {
                bid: mean,
                ask: mean,
            },
            partition: SignalPartition::all_no_trade(m),
            consistent_buy_sets: 1,
            consistent_sell_sets: 1,
        });
    }

    let values = structure.posterior_values(belief);
    let probs: Vec<f64> = (0..m)
        .map(|s| structure.signal_probability(belief, s))
        .collect();

    let mut descending: Vec<usize> = (0..m).collect();
    descending.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let mut ascending = descending.clone();
    ascending.reverse();

    let (ask, k_buy, consistent_buy_sets) =
        solve_side(Side::Ask, &descending, &values, &probs, mean, eta)
            .ok_or(Error::NoConsistentPartition)?;
    let (bid, k_sell, consistent_sell_sets) =
        solve_side(Side::Bid, &ascending, &values, &probs, mean, eta)
            .ok_or(Error::NoConsistentPartition)?;

    let mut assignment = vec![Action::NoTrade; m];
    for &s in &descending[..k_buy] {
        assignment[s] = Action::Buy;
    }
    for &s in &ascending[..k_sell] {
        assignment[s] = Action::Sell;
    }
    let lo = structure.states().min();
    let hi = structure.states().max();
    Ok(QuoteSolution {
        quotes: Quotes {
            bid: bid.clamp(lo, hi),
            ask: ask.clamp(lo, hi),
        },
        partition: SignalPartition::new(assignment),
        consistent_buy_sets,
        consistent_sell_sets,
    })
}

/// Zero-profit residual of the ask side:
/// `eta/3 (ask - E) - (1 - eta) sum_{S^B} (v_s - ask) f(s)`.
pub fn ask_residual(
    belief: &Belief,
    structure: &SignalStructure,
    eta: NoiseRate,
    ask: f64,
    buy_set: &[usize],
) -> f64 {
    let mean = expectation(structure.states(), belief);
    let values = structure.posterior_values(belief);
    let loss: f64 = buy_set
        .iter()
        .map(|&s| (values[s] - ask) * structure.signal_probability(belief, s))
        .sum();
    eta.per_action() * (ask - mean) - eta.informed() * loss
}

/// Zero-profit residual of the bid side:
/// `eta/3 (E - bid) - (1 - eta) sum_{S^S} (bid - v_s) f(s)`.
pub fn bid_residual(
    belief: &Belief,
    structure: &SignalStructure,
    eta: NoiseRate,
    bid: f64,
    sell_set: &[usize],
) -> f64 {
    let mean = expectation(structure.states(), belief);
    let values = structure.posterior_values(belief);
    let loss: f64 = sell_set
        .iter()
        .map(|&s| (bid - values[s]) * structure.signal_probability(belief, s))
        .sum();
    eta.per_action() * (mean - bid) - eta.informed() * loss
}

/// `E[w | a, H]`, the public expectation after observing `action`.
pub fn expectation_given_action(
    belief: &Belief,
    structure: &SignalStructure,
    partition: &SignalPartition,
    eta: NoiseRate,
    action: Action,
) -> f64 {
    let post = update_public_belief_on_action(belief, structure, partition, eta, action);
    expectation(structure.states(), &post)
}

/// An informational cascade: no signal leads an informed trader to trade.
pub fn detect_cascade(partition: &SignalPartition) -> bool {
    partition.is_all_no_trade()
}

/// Public state of the private-signal market at the start of a period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketState {
    pub belief: Belief,
    pub quotes: Quotes,
    pub partition: SignalPartition,
    pub period: usize,
    /// Last transaction price; the prior expectation before any trade.
    pub price: f64,
}

impl MarketState {
    pub fn new(prior: Belief, structure: &SignalStructure, eta: NoiseRate) -> Result<Self> {
        let (quotes, partition) = solve_quotes(&prior, structure, eta)?;
        let price = expectation(structure.states(), &prior);
        Ok(Self {
            belief: prior,
            quotes,
            partition,
            period: 0,
            price,
        })
    }

    /// `E[w | H_t]`.
    pub fn expectation(&self, structure: &SignalStructure) -> f64 {
        expectation(structure.states(), &self.belief)
    }

    pub fn in_cascade(&self) -> bool {
        detect_cascade(&self.partition)
    }

    pub fn action_probability(
        &self,
        structure: &SignalStructure,
        eta: NoiseRate,
        action: Action,
    ) -> f64 {
        action_probability(&self.belief, structure, &self.partition, eta, action)
    }

    pub fn action_likelihood(
        &self,
        structure: &SignalStructure,
        eta: NoiseRate,
        action: Action,
        state: usize,
    ) -> f64 {
        action_likelihood(structure, &self.partition, eta, action, state)
    }
}

/// Advances the market by one observed action. Buys execute at the ask,
/// sells at the bid, and no-trade leaves the transaction price unchanged.
pub fn step_market(
    state: &MarketState,
    structure: &SignalStructure,
    eta: NoiseRate,
    action: Action,
) -> Result<MarketState> {
    let price = match action {
        Action::Buy => state.quotes.ask,
        Action::Sell => state.quotes.bid,
        Action::NoTrade => state.price,
    };
    if state.in_cascade() {
        // Every action likelihood is state independent: nothing is learned.
        return Ok(MarketState {
            period: state.period + 1,
            price,
            ..state.clone()
        });
    }
    let belief =
        update_public_belief_on_action(&state.belief, structure, &state.partition, eta, action);
    let (quotes, partition) = solve_quotes(&belief, structure, eta)?;
    Ok(MarketState {
        belief,
        quotes,
        partition,
        period: state.period + 1,
        price,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn half() -> NoiseRate {
        NoiseRate::new(0.5).unwrap()
    }

    #[test]
    fn decision_rule() {
        let q = Quotes {
            bid: 0.32,
            ask: 0.68,
        };
        assert_eq!(informative_action(0.8, q), Action::Buy);
        assert_eq!(informative_action(0.2, q), Action::Sell);
        assert_eq!(informative_action(0.68, q), Action::NoTrade);
        assert_eq!(informative_action(0.32, q), Action::NoTrade);
        assert_eq!(informative_action(0.5, q), Action::NoTrade);
    }

    #[test]
    fn binary_quotes() {
        let s = fixtures::binary();
        let sol = solve_quotes_detailed(&Belief::uniform(2), &s, half()).unwrap();
        assert!((sol.quotes.ask - 0.68).abs() < 1e-12);
        assert!((sol.quotes.bid - 0.32).abs() < 1e-12);
        assert_eq!(sol.partition.assignment(), &[Action::Buy, Action::Sell]);
        assert_eq!(sol.consistent_buy_sets, 1);
        assert_eq!(sol.consistent_sell_sets, 1);
        assert!(ask_residual(&Belief::uniform(2), &s, half(), sol.quotes.ask, &[0]).abs() < 1e-12);
        assert!(bid_residual(&Belief::uniform(2), &s, half(), sol.quotes.bid, &[1]).abs() < 1e-12);
    }

    #[test]
    fn table1_uniform_prior_quotes_collapse() {
        let s = fixtures::table1();
        for eta in [0.0, 0.1, 0.5, 0.9] {
            let (q, p) =
                solve_quotes(&Belief::uniform(4), &s, NoiseRate::new(eta).unwrap()).unwrap();
            assert!((q.ask - 1.5).abs() < 1e-12, "eta {eta}: ask {}", q.ask);
            assert!((q.bid - 1.5).abs() < 1e-12, "eta {eta}: bid {}", q.bid);
            assert!(detect_cascade(&p), "eta {eta}");
        }
    }

    #[test]
    fn pure_noise_quotes_sit_at_expectation() {
        let s = fixtures::binary();
        let b = Belief::new(vec![0.3, 0.7]).unwrap();
        let (q, p) = solve_quotes(&b, &s, NoiseRate::new(1.0).unwrap()).unwrap();
        assert!((q.ask - 0.7).abs() < 1e-15 && (q.bid - 0.7).abs() < 1e-15);
        assert!(p.is_all_no_trade());
    }

    #[test]
    fn zero_noise_market_does_not_trade() {
        let s = fixtures::three_state();
        let b = Belief::new(vec![0.2, 0.5, 0.3]).unwrap();
        let sol = solve_quotes_detailed(&b, &s, NoiseRate::new(0.0).unwrap()).unwrap();
        assert!(sol.partition.is_all_no_trade());
        let values = s.posterior_values(&b);
        let max = values.iter().cloned().fold(f64::MIN, f64::max);
        let min = values.iter().cloned().fold(f64::MAX, f64::min);
        assert_eq!(sol.quotes.ask, max);
        assert_eq!(sol.quotes.bid, min);
    }

    #[test]
    fn step_after_buy() {
        let s = fixtures::binary();
        let st = MarketState::new(Belief::uniform(2), &s, half()).unwrap();
        assert_eq!(st.price, 0.5);
        let next = step_market(&st, &s, half(), Action::Buy).unwrap();
        assert!(
            next.belief
                .distance(&Belief::new(vec![0.32, 0.68]).unwrap())
                < 1e-12
        );
        assert!((next.price - 0.68).abs() < 1e-12);
        assert_eq!(next.period, 1);
    }

    #[test]
    fn no_trade_with_empty_cell_changes_nothing() {
        let s = fixtures::binary();
        let st = MarketState::new(Belief::uniform(2), &s, half()).unwrap();
        let next = step_market(&st, &s, half(), Action::NoTrade).unwrap();
        assert!(next.belief.distance(&st.belief) < 1e-15);
        assert_eq!(next.quotes, st.quotes);
        assert_eq!(next.price, st.price);
    }

    #[test]
    fn cascade_state_absorbs_every_action() {
        let s = fixtures::table1();
        let st = MarketState::new(Belief::uniform(4), &s, half()).unwrap();
        assert!(st.in_cascade());
        for a in Action::ALL {
            let next = step_market(&st, &s, half(), a).unwrap();
            assert_eq!(next.belief, st.belief);
            assert_eq!(next.price, 1.5);
        }
    }

    #[test]
    fn cascade_detection() {
        assert!(detect_cascade(&SignalPartition::all_no_trade(3)));
        assert!(!detect_cascade(&SignalPartition::new(vec![
            Action::Buy,
            Action::Sell
        ])));
        let s = fixtures::three_state();
        let (_, p) = solve_quotes(&Belief::degenerate(3, 1), &s, half()).unwrap();
        assert!(detect_cascade(&p));
    }

    #[test]
    fn resolving_is_idempotent() {
        let s = fixtures::three_state();
        let b = Belief::new(vec![0.2, 0.5, 0.3]).unwrap();
        let a = solve_quotes_detailed(&b, &s, half()).unwrap();
        let c = solve_quotes_detailed(&b, &s, half()).unwrap();
        assert_eq!(a, c);
    }

    #[test]
    fn quotes_are_conditional_expectations() {
        let s = fixtures::three_state();
        let b = Belief::new(vec![0.2, 0.5, 0.3]).unwrap();
        let eta = NoiseRate::new(0.2).unwrap();
        let (q, p) = solve_quotes(&b, &s, eta).unwrap();
        let eb = expectation_given_action(&b, &s, &p, eta, Action::Buy);
        let es = expectation_given_action(&b, &s, &p, eta, Action::Sell);
        assert!((eb - q.ask).abs() < 1e-12);
        assert!((es - q.bid).abs() < 1e-12);
        let mean = expectation(s.states(), &b);
        assert!(q.bid < mean && mean < q.ask);
    }
}
