//! Reference signal structures used by the tests, the benchmarks and the
//! bundled scenario files.

use crate::model::{SignalSpace, SignalStructure, StateSpace};

/// Four states `{0, 1, 2, 3}` and four signals whose uniform-prior
/// posteriors all have expectation 1.5: pairwise informative, yet an
/// informational cascade starts at the uniform prior.
pub fn table1() -> SignalStructure {
    SignalStructure::from_table(vec![
        vec![0.3, 0.2, 0.2, 0.3],
        vec![0.1, 0.4, 0.3, 0.2],
        vec![0.4, 0.1, 0.3, 0.2],
        vec![0.2, 0.3, 0.2, 0.3],
    ])
    .expect("table1 is a valid structure")
}

/// States `{0, 1}`, signals `l < h`, with `f(h | 1) = f(l | 0) = 0.8`.
///
/// Signal index 0 is `h` so that the high signal comes first in the
/// partition tests; MLRP checks use [`binary_ordered`].
pub fn binary() -> SignalStructure {
    SignalStructure::new(
        StateSpace::integers(2).unwrap(),
        SignalSpace::new(vec!["h".into(), "l".into()]).unwrap(),
        vec![vec![0.2, 0.8], vec![0.8, 0.2]],
    )
    .expect("binary structure is valid")
}

/// The binary structure with signals listed low-to-high (`l`, `h`).
pub fn binary_ordered() -> SignalStructure {
    SignalStructure::new(
        StateSpace::integers(2).unwrap(),
        SignalSpace::new(vec!["l".into(), "h".into()]).unwrap(),
        vec![vec![0.8, 0.2], vec![0.2, 0.8]],
    )
    .expect("binary structure is valid")
}

/// Three states, three signals, pairwise informative.
pub fn three_state() -> SignalStructure {
    SignalStructure::from_table(vec![
        vec![0.5, 0.3, 0.2],
        vec![0.25, 0.5, 0.25],
        vec![0.2, 0.3, 0.5],
    ])
    .expect("three-state structure is valid")
}

/// Three states where states 1 and 2 share a signal distribution.
pub fn duplicated_rows() -> SignalStructure {
    SignalStructure::from_table(vec![vec![0.6, 0.4], vec![0.3, 0.7], vec![0.3, 0.7]])
        .expect("duplicated-row structure is valid")
}

/// Every state has the same signal distribution.
pub fn row_constant() -> SignalStructure {
    SignalStructure::from_table(vec![
        vec![0.2, 0.5, 0.3],
        vec![0.2, 0.5, 0.3],
        vec![0.2, 0.5, 0.3],
    ])
    .expect("row-constant structure is valid")
}
