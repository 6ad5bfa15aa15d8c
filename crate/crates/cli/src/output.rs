use std::fs;
use std::path::{Path, PathBuf};

use market_learn::{EpisodeResult, SignalStructure};
use serde::Serialize;

use crate::error::CliError;

pub const EPISODE_COLUMNS: [&str; 6] = [
    "episode",
    "true_state",
    "final_price",
    "final_belief_on_truth",
    "cascade_time",
    "learned",
];

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Write {
        path: dir.to_path_buf(),
        source,
    })
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    text
}

pub fn write_text(path: PathBuf, text: &str) -> Result<PathBuf, CliError> {
    fs::write(&path, text).map_err(|source| CliError::Write {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

pub fn write_json<T: Serialize>(path: PathBuf, value: &T) -> Result<PathBuf, CliError> {
    write_text(path, &to_json(value))
}

/// One row per episode.
pub fn write_episodes_csv(
    path: PathBuf,
    results: &[EpisodeResult],
    structure: &SignalStructure,
    tol: f64,
) -> Result<PathBuf, CliError> {
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(EPISODE_COLUMNS)?;
    for r in results {
        w.write_record([
            r.episode.to_string(),
            r.true_state.to_string(),
            r.final_price().to_string(),
            r.final_belief_on_truth.to_string(),
            r.cascade_time.map(|t| t.to_string()).unwrap_or_default(),
            r.learned(structure, tol).to_string(),
        ])?;
    }
    w.flush().map_err(|source| CliError::Write {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

/// Thinned price and belief paths: `episode,period,price,mu_0..mu_{n-1}`.
pub fn write_paths_csv(
    path: PathBuf,
    results: &[EpisodeResult],
    thin: usize,
) -> Result<PathBuf, CliError> {
    let mut w = csv::Writer::from_path(&path)?;
    let n = results.first().map_or(0, |r| r.belief_path[0].len());
    let mut header = vec![
        "episode".to_string(),
        "period".to_string(),
        "price".to_string(),
    ];
    header.extend((0..n).map(|i| format!("mu_{i}")));
    w.write_record(&header)?;
    for r in results {
        for (t, belief) in r.thinned_beliefs(thin) {
            let mut row = vec![
                r.episode.to_string(),
                t.to_string(),
                r.price_path[t].to_string(),
            ];
            row.extend(belief.weights().iter().map(f64::to_string));
            w.write_record(&row)?;
        }
    }
    w.flush().map_err(|source| CliError::Write {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}
