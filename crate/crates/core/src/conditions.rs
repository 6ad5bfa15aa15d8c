//! Checkers for the learning conditions: pairwise informativeness, signal
//! crossings, MLRP, cascade beliefs and a numerical audit of the
//! Avery-Zemsky condition (AZC).
//!
//! AZC quantifies over every full-support belief, so it cannot be verified
//! exhaustively. [`azc_audit`] evaluates a simplex grid (or a random sample
//! when there are more than four states) together with every full-support
//! cascade belief found by sweeping the target expectation, and reports the
//! smallest price movement any audited belief admits. A pass means no
//! audited belief is stuck; it does not certify a uniform lower bound.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{expectation, Belief, SignalStructure};

/// Default tolerance for "identical rows" in the PI check.
pub const PI_TOL: f64 = 1e-9;
/// Default tolerance for cascade-belief checks.
pub const CASCADE_TOL: f64 = 1e-9;
/// Default movement below which a belief counts as stuck.
pub const MOVEMENT_TOL: f64 = 1e-9;
/// Relative singular-value cutoff for rank decisions.
pub const SVD_CUTOFF: f64 = 1e-10;
/// Movements below this are floating-point noise and are recorded as zero.
const ROUNDOFF: f64 = 1e-12;
/// Largest state space the cascade-belief vertex enumeration accepts.
pub const MAX_ENUMERATED_STATES: usize = 16;

/// Counterexample attached to a failed condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    StatePair {
        first: usize,
        second: usize,
    },
    /// `lhs = f(sL|wL) f(sH|wH)` and `rhs = f(sL|wH) f(sH|wL)`.
    Quadruple {
        low_signal: usize,
        high_signal: usize,
        low_state: usize,
        high_state: usize,
        lhs: f64,
        rhs: f64,
    },
    Belief {
        belief: Belief,
        movement: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub holds: bool,
    pub witness: Option<Witness>,
    pub detail: String,
}

impl ConditionReport {
    fn pass(detail: impl Into<String>) -> Self {
        Self {
            holds: true,
            witness: None,
            detail: detail.into(),
        }
    }

    fn fail(witness: Witness, detail: impl Into<String>) -> Self {
        Self {
            holds: false,
            witness: Some(witness),
            detail: detail.into(),
        }
    }
}

/// Holds iff every pair of states has signal distributions differing by
/// more than `tol` in at least one signal.
pub fn is_pairwise_informative(structure: &SignalStructure, tol: f64) -> ConditionReport {
    let n = structure.num_states();
    for a in 0..n {
        for b in a + 1..n {
            let gap = structure
                .row(a)
                .iter()
                .zip(structure.row(b))
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            if gap <= tol {
                return ConditionReport::fail(
                    Witness::StatePair {
                        first: a,
                        second: b,
                    },
                    format!(
                        "states {a} and {b} have identical signal distributions (max gap {gap:e})"
                    ),
                );
            }
        }
    }
    ConditionReport::pass(format!(
        "all {} state pairs are distinguishable",
        n * (n - 1) / 2
    ))
}

/// Signals `(s1, s2)` with `f(s1|a) > f(s1|b)` and `f(s2|a) < f(s2|b)`,
/// choosing the largest gap on each side.
pub fn find_crossing_signals(
    structure: &SignalStructure,
    state_a: usize,
    state_b: usize,
) -> Result<(usize, usize)> {
    let n = structure.num_states();
    for s in [state_a, state_b] {
        if s >= n {
            return Err(Error::UnknownState(s));
        }
    }
    if state_a == state_b {
        return Err(Error::PreconditionFailed(
            "crossing signals need two distinct states".into(),
        ));
    }
    let diffs: Vec<f64> = structure
        .row(state_a)
        .iter()
        .zip(structure.row(state_b))
        .map(|(x, y)| x - y)
        .collect();
    let mut up: Option<usize> = None;
    let mut down: Option<usize> = None;
    for (s, &d) in diffs.iter().enumerate() {
        if d > 0.0 && up.is_none_or(|u| d > diffs[u]) {
            up = Some(s);
        }
        if d < 0.0 && down.is_none_or(|u| d < diffs[u]) {
            down = Some(s);
        }
    }
    match (up, down) {
        (Some(s1), Some(s2)) => Ok((s1, s2)),
        _ => Err(Error::NotPairwiseInformative(state_a, state_b)),
    }
}

/// Monotone likelihood ratio check over every `sL < sH`, `wL < wH`.
///
/// Strict mode requires every inequality to be strict. When the property
/// fails, the witness is the quadruple with the largest violation
/// `rhs - lhs` (first one in signal-pair, then state-pair order on ties).
pub fn is_mlrp(structure: &SignalStructure, strict: bool) -> ConditionReport {
    let (n, m) = (structure.num_states(), structure.num_signals());
    let mut worst: Option<(f64, Witness)> = None;
    let mut violations = 0usize;
    for low_signal in 0..m {
        for high_signal in low_signal + 1..m {
            for low_state in 0..n {
                for high_state in low_state + 1..n {
                    let lhs = structure.likelihood(low_state, low_signal)
                        * structure.likelihood(high_state, high_signal);
                    let rhs = structure.likelihood(high_state, low_signal)
                        * structure.likelihood(low_state, high_signal);
                    let violated = if strict { lhs <= rhs } else { lhs < rhs };
                    if !violated {
                        continue;
                    }
                    violations += 1;
                    let gap = rhs - lhs;
                    if worst.as_ref().is_none_or(|(g, _)| gap > *g) {
                        worst = Some((
                            gap,
                            Witness::Quadruple {
                                low_signal,
                                high_signal,
                                low_state,
                                high_state,
                                lhs,
                                rhs,
                            },
                        ));
                    }
                }
            }
        }
    }
    let kind = if strict { "strict MLRP" } else { "MLRP" };
    match worst {
        None => ConditionReport::pass(format!("{kind} holds for every signal and state pair")),
        Some((gap, witness)) => ConditionReport::fail(
            witness,
            format!("{kind} fails on {violations} quadruple(s); worst cross-product gap {gap:.6}"),
        ),
    }
}

/// `max_s |E[w | s] - E[w]|` under `belief`.
pub fn max_movement(structure: &SignalStructure, belief: &Belief) -> f64 {
    let mean = expectation(structure.states(), belief);
    structure
        .posterior_values(belief)
        .into_iter()
        .map(|v| (v - mean).abs())
        .fold(0.0, f64::max)
}

/// Holds iff no signal moves the expectation by more than `tol`.
pub fn is_cascade_belief(
    structure: &SignalStructure,
    belief: &Belief,
    tol: f64,
) -> ConditionReport {
    let movement = max_movement(structure, belief);
    if movement <= tol {
        ConditionReport::pass(format!(
            "largest posterior movement {movement:e} is within {tol:e}"
        ))
    } else {
        ConditionReport::fail(
            Witness::Belief {
                belief: belief.clone(),
                movement,
            },
            format!("some signal moves the expectation by {movement:e}"),
        )
    }
}

/// Beliefs with expectation `c` under which every signal posterior also
/// has expectation `c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeBeliefSet {
    pub target_expectation: f64,
    /// Vertices of the cascade polytope, followed by their centroid when it
    /// is a full-support belief not already listed.
    pub beliefs: Vec<Belief>,
    /// Dimension of the null space of `M(c)[s][w] = f(s|w) (w - c)`.
    pub basis_dimension: usize,
    /// Orthonormal basis of that null space.
    pub null_space: Vec<Vec<f64>>,
}

impl CascadeBeliefSet {
    pub fn full_support(&self) -> impl Iterator<Item = &Belief> {
        self.beliefs.iter().filter(|b| b.is_full_support())
    }

    pub fn contains(&self, belief: &Belief, tol: f64) -> bool {
        self.beliefs.iter().any(|b| b.distance(belief) <= tol)
    }
}

fn cascade_matrix(structure: &SignalStructure, c: f64) -> DMatrix<f64> {
    let states = structure.states();
    DMatrix::from_fn(structure.num_signals(), structure.num_states(), |s, w| {
        structure.likelihood(w, s) * (states.value(w) - c)
    })
}

fn null_space(matrix: &DMatrix<f64>) -> Vec<Vec<f64>> {
    let (rows, cols) = matrix.shape();
    // Pad to at least square so the SVD exposes all right singular vectors.
    let padded = DMatrix::from_fn(rows.max(cols), cols, |i, j| {
        if i < rows {
            matrix[(i, j)]
        } else {
            0.0
        }
    });
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let largest = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, sv)| **sv <= SVD_CUTOFF * largest || largest == 0.0)
        .map(|(i, _)| v_t.row(i).iter().cloned().collect())
        .collect()
}

/// Solves `A_S x = b` for a column subset when the columns are independent.
fn basic_solution(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    support: &[usize],
    tol: f64,
) -> Option<Vec<f64>> {
    let sub = a.select_columns(support);
    let svd = sub.clone().svd(true, true);
    let largest = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let smallest = svd
        .singular_values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if largest == 0.0 || smallest <= SVD_CUTOFF * largest {
        return None;
    }
    let x = svd.solve(b, 0.0).ok()?;
    let residual = (&sub * &x - b).amax();
    if residual > tol || x.iter().any(|v| *v < -tol) {
        return None;
    }
    Some(x.iter().map(|v| v.max(0.0)).collect())
}

/// Solves the cascade system `sum_w (w - c) f(s|w) mu(w) = 0` for all `s`
/// on the probability simplex.
///
/// The feasible set is a polytope; its vertices are the basic solutions of
/// `[M(c); 1] x = (0, 1)`, found by enumerating column supports.
pub fn find_cascade_beliefs(
    structure: &SignalStructure,
    c: f64,
    tol: f64,
) -> Result<CascadeBeliefSet> {
    let states = structure.states();
    if !(c >= states.min() && c <= states.max()) {
        return Err(Error::OutOfHull {
            c,
            low: states.min(),
            high: states.max(),
        });
    }
    let n = structure.num_states();
    if n > MAX_ENUMERATED_STATES {
        return Err(Error::PreconditionFailed(format!(
            "cascade-belief enumeration supports at most {MAX_ENUMERATED_STATES} states"
        )));
    }
    let m = structure.num_signals();
    let matrix = cascade_matrix(structure, c);
    let null = null_space(&matrix);

    let augmented = DMatrix::from_fn(m + 1, n, |i, j| if i < m { matrix[(i, j)] } else { 1.0 });
    let mut rhs = DVector::zeros(m + 1);
    rhs[m] = 1.0;

    let mut vertices: Vec<Belief> = Vec::new();
    for mask in 1u32..(1u32 << n) {
        let support: Vec<usize> = (0..n).filter(|j| mask & (1 << j) != 0).collect();
        if support.len() > m + 1 {
            continue;
        }
        let Some(x) = basic_solution(&augmented, &rhs, &support, tol) else {
            continue;
        };
        let mut weights = vec![0.0; n];
        for (&j, v) in support.iter().zip(&x) {
            weights[j] = *v;
        }
        let Ok(belief) = Belief::from_unnormalized(weights) else {
            continue;
        };
        if !is_cascade_belief(structure, &belief, tol).holds {
            continue;
        }
        if !vertices.iter().any(|v| v.distance(&belief) <= tol) {
            vertices.push(belief);
        }
    }

    let mut beliefs = vertices.clone();
    if !vertices.is_empty() {
        let centroid: Vec<f64> = (0..n)
            .map(|j| vertices.iter().map(|v| v.get(j)).sum::<f64>() / vertices.len() as f64)
            .collect();
        if let Ok(centroid) = Belief::from_unnormalized(centroid) {
            if centroid.is_full_support()
                && !beliefs.iter().any(|v| v.distance(&centroid) <= tol)
                && is_cascade_belief(structure, &centroid, tol).holds
            {
                beliefs.push(centroid);
            }
        }
    }
    Ok(CascadeBeliefSet {
        target_expectation: c,
        beliefs,
        basis_dimension: null.len(),
        null_space: null,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AzcAuditConfig {
    pub delta: f64,
    /// Grid points per simplex edge when there are at most four states.
    pub grid_resolution: usize,
    pub movement_tol: f64,
    /// Target expectations swept for exact cascade beliefs.
    pub c_points: usize,
    /// Random beliefs drawn instead of the grid above four states.
    pub random_samples: usize,
    pub seed: u64,
}

impl Default for AzcAuditConfig {
    fn default() -> Self {
        Self {
            delta: 0.1,
            grid_resolution: 50,
            movement_tol: MOVEMENT_TOL,
            c_points: 200,
            random_samples: 100_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AzcAuditReport {
    pub delta: f64,
    pub grid_resolution: usize,
    pub audited_beliefs: usize,
    pub cascade_beliefs: usize,
    pub worst_belief: Belief,
    /// Smallest `max_s |E[w|s] - E[w]|` over audited beliefs.
    pub min_max_movement: f64,
    pub movement_tol: f64,
    pub verdict: Verdict,
}

pub fn azc_audit(
    structure: &SignalStructure,
    delta: f64,
    grid_resolution: usize,
    movement_tol: f64,
) -> AzcAuditReport {
    azc_audit_with(
        structure,
        &AzcAuditConfig {
            delta,
            grid_resolution,
            movement_tol,
            ..AzcAuditConfig::default()
        },
    )
}

/// Interior grid points `k / g` with every `k_i >= 1` and `sum k = g`.
fn simplex_grid(n: usize, g: usize) -> Vec<Belief> {
    fn recurse(n: usize, remaining: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if n == 1 {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in 1..=remaining.saturating_sub(n - 1) {
            prefix.push(k);
            recurse(n - 1, remaining - k, prefix, out);
            prefix.pop();
        }
    }
    if g < n {
        return Vec::new();
    }
    let mut counts = Vec::new();
    recurse(n, g, &mut Vec::with_capacity(n), &mut counts);
    counts
        .into_iter()
        .map(|c| {
            Belief::from_unnormalized(c.into_iter().map(|k| k as f64).collect())
                .expect("grid weights are positive")
        })
        .collect()
}

fn random_beliefs(n: usize, count: usize, seed: u64) -> Vec<Belief> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .filter_map(|_| {
            let w: Vec<f64> = (0..n).map(|_| Exp1.sample(&mut rng)).collect();
            Belief::from_unnormalized(w)
                .ok()
                .filter(Belief::is_full_support)
        })
        .collect()
}

/// Numerical AZC audit; see the module docs for what it does and does not
/// establish.
pub fn azc_audit_with(structure: &SignalStructure, config: &AzcAuditConfig) -> AzcAuditReport {
    let n = structure.num_states();
    let states = structure.states();

    let mut audit = vec![Belief::uniform(n)];
    if n <= 4 {
        audit.extend(simplex_grid(n, config.grid_resolution.max(2)));
    } else {
        audit.extend(random_beliefs(n, config.random_samples, config.seed));
    }
    let mut cascade_beliefs = 0;
    if n <= MAX_ENUMERATED_STATES && config.c_points >= 2 {
        let (lo, hi) = (states.min(), states.max());
        for i in 0..config.c_points {
            let c = lo + (hi - lo) * i as f64 / (config.c_points - 1) as f64;
            if let Ok(set) = find_cascade_beliefs(structure, c, CASCADE_TOL) {
                for b in set.full_support() {
                    cascade_beliefs += 1;
                    audit.push(b.clone());
                }
            }
        }
    }

    let delta = config.delta;
    let best = audit
        .par_iter()
        .enumerate()
        .filter(|(_, b)| {
            let mean = expectation(states, b);
            b.is_full_support()
                && (0..n).any(|w| b.get(w) > 0.0 && (mean - states.value(w)).abs() > delta)
        })
        .map(|(i, b)| {
            let m = max_movement(structure, b);
            (if m < ROUNDOFF { 0.0 } else { m }, i)
        })
        .reduce_with(|a, b| {
            if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) {
                b
            } else {
                a
            }
        });
    let audited = audit
        .iter()
        .filter(|b| {
            let mean = expectation(states, b);
            (0..n).any(|w| (mean - states.value(w)).abs() > delta)
        })
        .count();

    let (min_max_movement, idx) = best.unwrap_or((f64::INFINITY, 0));
    AzcAuditReport {
        delta,
        grid_resolution: config.grid_resolution,
        audited_beliefs: audited,
        cascade_beliefs,
        worst_belief: audit[idx].clone(),
        min_max_movement,
        movement_tol: config.movement_tol,
        verdict: if min_max_movement <= config.movement_tol {
            Verdict::Fail
        } else {
            Verdict::Pass
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn pairwise_informative_cases() {
        assert!(is_pairwise_informative(&fixtures::table1(), PI_TOL).holds);
        assert!(is_pairwise_informative(&fixtures::binary(), PI_TOL).holds);
        let r = is_pairwise_informative(&fixtures::duplicated_rows(), PI_TOL);
        assert!(!r.holds);
        assert_eq!(
            r.witness,
            Some(Witness::StatePair {
                first: 1,
                second: 2
            })
        );
    }

    #[test]
    fn crossing_signals() {
        assert_eq!(
            find_crossing_signals(&fixtures::binary(), 1, 0).unwrap(),
            (0, 1)
        );
        assert_eq!(
            find_crossing_signals(&fixtures::table1(), 0, 1).unwrap(),
            (0, 1)
        );
        assert_eq!(
            find_crossing_signals(&fixtures::duplicated_rows(), 1, 2),
            Err(Error::NotPairwiseInformative(1, 2))
        );
        assert!(find_crossing_signals(&fixtures::binary(), 0, 0).is_err());
        assert_eq!(
            find_crossing_signals(&fixtures::binary(), 0, 7),
            Err(Error::UnknownState(7))
        );
    }

    #[test]
    fn mlrp_cases() {
        assert!(is_mlrp(&fixtures::binary_ordered(), true).holds);
        let r = is_mlrp(&fixtures::table1(), true);
        assert!(!r.holds);
        match r.witness {
            Some(Witness::Quadruple {
                low_signal: 0,
                high_signal: 1,
                low_state: 1,
                high_state: 2,
                lhs,
                rhs,
            }) => {
                assert!((lhs - 0.01).abs() < 1e-15);
                assert!((rhs - 0.16).abs() < 1e-15);
            }
            other => panic!("unexpected witness {other:?}"),
        }
        let flat = fixtures::row_constant();
        assert!(is_mlrp(&flat, false).holds);
        assert!(!is_mlrp(&flat, true).holds);
    }

    #[test]
    fn cascade_belief_cases() {
        assert!(is_cascade_belief(&fixtures::table1(), &Belief::uniform(4), CASCADE_TOL).holds);
        let r = is_cascade_belief(&fixtures::binary(), &Belief::uniform(2), CASCADE_TOL);
        assert!(!r.holds);
        assert!(
            matches!(r.witness, Some(Witness::Belief { movement, .. }) if (movement - 0.3).abs() < 1e-12)
        );
        for w in 0..4 {
            assert!(
                is_cascade_belief(&fixtures::table1(), &Belief::degenerate(4, w), CASCADE_TOL)
                    .holds
            );
        }
    }

    #[test]
    fn table1_cascade_set_contains_uniform() {
        let set = find_cascade_beliefs(&fixtures::table1(), 1.5, CASCADE_TOL).unwrap();
        assert!(set.contains(&Belief::uniform(4), 1e-10));
        assert!(set.basis_dimension >= 1);
    }

    #[test]
    fn table1_cascades_on_an_interval_of_targets() {
        // Rows of the table1 fixture are annihilated by (w - 1.5), so mu ~ (w - 1.5)/(w - c)
        // is a full-support cascade belief for every c in (1, 2).
        for c in [1.1, 1.3, 1.7, 1.9] {
            let set = find_cascade_beliefs(&fixtures::table1(), c, CASCADE_TOL).unwrap();
            let expected: Vec<f64> = (0..4).map(|w| (w as f64 - 1.5) / (w as f64 - c)).collect();
            let expected = Belief::from_unnormalized(expected).unwrap();
            assert!(set.contains(&expected, 1e-9), "c = {c}");
        }
        let set = find_cascade_beliefs(&fixtures::table1(), 0.5, CASCADE_TOL).unwrap();
        assert_eq!(set.full_support().count(), 0);
    }

    #[test]
    fn binary_has_no_full_support_cascade() {
        for c in [0.1, 0.5, 0.9] {
            let set = find_cascade_beliefs(&fixtures::binary(), c, CASCADE_TOL).unwrap();
            assert_eq!(set.full_support().count(), 0);
            assert_eq!(set.basis_dimension, 0);
        }
    }

    #[test]
    fn lowest_state_target_only_admits_degenerate_belief() {
        let set = find_cascade_beliefs(&fixtures::table1(), 0.0, CASCADE_TOL).unwrap();
        assert_eq!(set.full_support().count(), 0);
        assert!(set.contains(&Belief::degenerate(4, 0), 1e-12));
    }

    #[test]
    fn out_of_hull_target() {
        assert!(matches!(
            find_cascade_beliefs(&fixtures::table1(), 3.5, CASCADE_TOL),
            Err(Error::OutOfHull { .. })
        ));
    }

    #[test]
    fn simplex_grid_counts() {
        assert_eq!(simplex_grid(2, 100).len(), 99);
        assert_eq!(simplex_grid(4, 8).len(), 35);
        assert!(simplex_grid(3, 10).iter().all(Belief::is_full_support));
    }

    #[test]
    fn azc_table1_fails_at_uniform() {
        let r = azc_audit(&fixtures::table1(), 0.1, 50, MOVEMENT_TOL);
        assert_eq!(r.verdict, Verdict::Fail);
        assert_eq!(r.min_max_movement, 0.0);
        assert_eq!(r.worst_belief, Belief::uniform(4));
    }

    #[test]
    fn azc_binary_passes() {
        let r = azc_audit(&fixtures::binary(), 0.1, 100, MOVEMENT_TOL);
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(r.min_max_movement > 0.0);
        assert_eq!(r.cascade_beliefs, 0);
    }

    #[test]
    fn azc_row_constant_fails() {
        let r = azc_audit(&fixtures::row_constant(), 0.1, 20, MOVEMENT_TOL);
        assert_eq!(r.verdict, Verdict::Fail);
        assert_eq!(r.min_max_movement, 0.0);
    }
}
