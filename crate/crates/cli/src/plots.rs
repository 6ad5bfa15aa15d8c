//! Minimal SVG line charts for simulation output.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use market_learn::{EpisodeResult, SignalStructure};

use crate::error::CliError;
use crate::output::write_text;

/// Episodes drawn in the overlay charts.
pub const OVERLAY_EPISODES: usize = 10;
const MAX_POINTS: usize = 1000;
const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const MARGIN: (f64, f64, f64, f64) = (60.0, 20.0, 40.0, 50.0); // left, right, top, bottom
const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

struct Chart<'a> {
    title: &'a str,
    x_label: &'a str,
    y_label: &'a str,
    x_range: (f64, f64),
    y_range: (f64, f64),
    series: Vec<Vec<(f64, f64)>>,
}

impl Chart<'_> {
    fn render(&self) -> String {
        let (left, right, top, bottom) = MARGIN;
        let plot_w = WIDTH - left - right;
        let plot_h = HEIGHT - top - bottom;
        let span = |(lo, hi): (f64, f64)| if hi > lo { hi - lo } else { 1.0 };
        let sx = |x: f64| left + (x - self.x_range.0) / span(self.x_range) * plot_w;
        let sy = |y: f64| top + plot_h - (y - self.y_range.0) / span(self.y_range) * plot_h;

        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
        );
        let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="24" font-family="sans-serif" font-size="15" text-anchor="middle">{}</text>"#,
            WIDTH / 2.0,
            self.title
        );
        let _ = writeln!(
            svg,
            r#"<rect x="{left}" y="{top}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
        );
        for i in 0..=4 {
            let f = i as f64 / 4.0;
            let x = self.x_range.0 + f * (self.x_range.1 - self.x_range.0);
            let y = self.y_range.0 + f * (self.y_range.1 - self.y_range.0);
            let _ = writeln!(
                svg,
                r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
                sx(x),
                top + plot_h + 16.0,
                tick(x)
            );
            let _ = writeln!(
                svg,
                r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#,
                left - 6.0,
                sy(y) + 4.0,
                tick(y)
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#,
            left + plot_w / 2.0,
            HEIGHT - 10.0,
            self.x_label
        );
        let _ = writeln!(
            svg,
            r#"<text x="14" y="{:.1}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 14 {:.1})">{}</text>"#,
            top + plot_h / 2.0,
            top + plot_h / 2.0,
            self.y_label
        );
        for (i, points) in self.series.iter().enumerate() {
            let coords: Vec<String> = points
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            let _ = writeln!(
                svg,
                r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
                PALETTE[i % PALETTE.len()],
                coords.join(" ")
            );
        }
        svg.push_str("</svg>\n");
        svg
    }
}

fn tick(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e9 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

fn downsample(values: impl ExactSizeIterator<Item = f64>) -> Vec<(f64, f64)> {
    let len = values.len();
    let stride = len.div_ceil(MAX_POINTS).max(1);
    values
        .enumerate()
        .filter(|(t, _)| t % stride == 0 || *t + 1 == len)
        .map(|(t, v)| (t as f64, v))
        .collect()
}

/// Writes `price_paths.svg`, `belief_on_truth.svg` and
/// `learned_fraction.svg` into `dir`.
pub fn emit_plots(
    results: &[EpisodeResult],
    structure: &SignalStructure,
    convergence_tol: f64,
    dir: &Path,
) -> Result<Vec<PathBuf>, CliError> {
    if results.is_empty() {
        return Err(CliError::MissingResults);
    }
    let horizon = results
        .iter()
        .map(|r| r.price_path.len() - 1)
        .max()
        .unwrap_or(0) as f64;
    let shown = &results[..results.len().min(OVERLAY_EPISODES)];
    let states = structure.states();

    let prices = Chart {
        title: "Transaction price",
        x_label: "period",
        y_label: "price",
        x_range: (0.0, horizon),
        y_range: (states.min(), states.max()),
        series: shown
            .iter()
            .map(|r| downsample(r.price_path.iter().copied()))
            .collect(),
    };
    let beliefs = Chart {
        title: "Public belief on the true state",
        x_label: "period",
        y_label: "belief",
        x_range: (0.0, horizon),
        y_range: (0.0, 1.0),
        series: shown
            .iter()
            .map(|r| downsample(r.belief_path.iter().map(|b| b.get(r.true_state))))
            .collect(),
    };
    let checkpoints = (horizon as usize).clamp(1, 200);
    let learned: Vec<(f64, f64)> = (0..=checkpoints)
        .map(|i| {
            let t = i * horizon as usize / checkpoints;
            let hits = results
                .iter()
                .filter(|r| {
                    let p = r.price_path[t.min(r.price_path.len() - 1)];
                    (p - states.value(r.true_state)).abs() < convergence_tol
                })
                .count();
            (t as f64, hits as f64 / results.len() as f64)
        })
        .collect();
    let fraction = Chart {
        title: "Learned fraction by horizon",
        x_label: "period",
        y_label: "fraction within tolerance",
        x_range: (0.0, horizon),
        y_range: (0.0, 1.0),
        series: vec![learned],
    };

    [
        ("price_paths.svg", prices),
        ("belief_on_truth.svg", beliefs),
        ("learned_fraction.svg", fraction),
    ]
    .into_iter()
    .map(|(name, chart)| write_text(dir.join(name), &chart.render()))
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use market_learn::fixtures;
    use market_learn::simulation::run_episodes;
    use market_learn::{Belief, Mode, NoiseRate, ScenarioConfig};

    #[test]
    fn empty_results_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let err = emit_plots(&[], &fixtures::binary(), 0.1, dir.path()).unwrap_err();
        assert!(matches!(err, CliError::MissingResults));
    }

    #[test]
    fn overlay_has_one_polyline_per_episode() {
        let config = ScenarioConfig::new(
            fixtures::table1(),
            Belief::uniform(4),
            NoiseRate::new(0.5).unwrap(),
            Mode::Private,
        )
        .with_episodes(25)
        .with_horizon(50);
        let results = run_episodes(&config).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let files = emit_plots(&results, &config.structure, 0.1, dir.path()).unwrap();
        assert_eq!(files.len(), 3);
        let svg = std::fs::read_to_string(&files[0]).unwrap();
        assert_eq!(svg.matches("<polyline").count(), OVERLAY_EPISODES);
        // The table1 fixture from the uniform prior: every price line is flat at 1.5.
        let (_, _, top, bottom) = MARGIN;
        let mid = top + (HEIGHT - top - bottom) / 2.0;
        for line in svg.lines().filter(|l| l.starts_with("<polyline")) {
            let points = line
                .split("points=\"")
                .nth(1)
                .unwrap()
                .trim_end_matches("\"/>");
            for p in points.split(' ') {
                let y: f64 = p.split(',').nth(1).unwrap().parse().unwrap();
                assert!((y - mid).abs() < 0.01);
            }
        }
    }
}
