//! `market-learn`: command-line front end for the market-learn simulator.

mod error;
mod output;
mod plots;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use market_learn::conditions::{
    azc_audit_with, find_cascade_beliefs, is_cascade_belief, is_mlrp, is_pairwise_informative,
    max_movement, AzcAuditConfig, CASCADE_TOL, PI_TOL,
};
use market_learn::market::detect_cascade;
use market_learn::simulation::{compare_modes, run_episodes, summarize};
use market_learn::verification::{check_limit_support_3state, run_suite, SuiteConfig};
use market_learn::{
    Action, AzcAuditReport, Belief, CascadeBeliefSet, ConditionReport, DeviationReport,
    MarketState, Mode, NoiseRate, Scenario, ScenarioConfig,
};
use serde::Serialize;

use crate::error::CliError;
use crate::output::{ensure_dir, to_json, write_episodes_csv, write_json, write_paths_csv};

const THREADS_ENV: &str = "MARKET_LEARN_THREADS";

#[derive(Parser)]
#[command(
    name = "market-learn",
    version,
    about = "Observational learning in sequential-trade markets"
)]
struct Cli {
    /// Print errors as one JSON object on stderr.
    #[arg(long, global = true)]
    json_errors: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report PI, MLRP, cascade and AZC verdicts for the scenario's structure.
    Check(Common),
    /// Solve the bid and ask quotes and the signal partition at a belief.
    Quotes {
        #[command(flatten)]
        common: Common,
        /// Comma-separated belief weights; defaults to the scenario prior.
        #[arg(long)]
        belief: Option<String>,
    },
    /// Run Monte Carlo episodes and write CSV, JSON and optional SVG output.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Also write SVG charts into the output directory.
        #[arg(long)]
        plots: bool,
    },
    /// Run both market modes on identical draws and compare learning.
    Compare(Common),
    /// Sweep target expectations and list exact cascade beliefs.
    CascadeScan {
        #[command(flatten)]
        common: Common,
        /// Number of interior target expectations.
        #[arg(long, default_value_t = 50)]
        c_points: usize,
    },
    /// Run the verification suite; exits 2 on a hard-check failure.
    Verify(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Directory for written artifacts.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    episodes: Option<usize>,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Noise-trader probability.
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long, value_parser = ["private", "public"])]
    mode: Option<String>,
}

impl Common {
    fn load(&self) -> Result<ScenarioConfig, CliError> {
        let path = self
            .scenario
            .as_ref()
            .ok_or_else(|| CliError::Usage("--scenario is required".into()))?;
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.clone(),
            source,
        })?;
        let mut config = Scenario::from_json(&text)?.to_config()?;
        if let Some(n) = self.episodes {
            config.episodes = n;
        }
        if let Some(t) = self.horizon {
            config.horizon = t;
        }
        if let Some(s) = self.seed {
            config.seed = s;
        }
        if let Some(e) = self.eta {
            config.eta = NoiseRate::new(e)?;
        }
        if let Some(m) = &self.mode {
            config.mode = m.parse::<Mode>()?;
        }
        config.validate()?;
        Ok(config)
    }

    fn output_dir(&self) -> Result<Option<&Path>, CliError> {
        match &self.output {
            Some(dir) => {
                ensure_dir(dir)?;
                Ok(Some(dir))
            }
            None => Ok(None),
        }
    }
}

#[derive(Serialize)]
struct CheckReport {
    pairwise_informative: ConditionReport,
    mlrp: ConditionReport,
    strict_mlrp: ConditionReport,
    cascade_at_uniform: ConditionReport,
    uniform_max_movement: f64,
    cascade_at_prior: bool,
    azc: AzcAuditReport,
}

#[derive(Serialize)]
struct SignalAction<'a> {
    signal: &'a str,
    posterior_value: f64,
    action: Action,
}

#[derive(Serialize)]
struct QuotesReport<'a> {
    belief: Vec<f64>,
    eta: f64,
    expectation: f64,
    bid: f64,
    ask: f64,
    spread: f64,
    partition: Vec<SignalAction<'a>>,
    cascade: bool,
}

#[derive(Serialize)]
struct ScanEntry {
    c: f64,
    full_support: usize,
    set: CascadeBeliefSet,
}

#[derive(Serialize)]
struct VerifyReport {
    seed: u64,
    hard_failures: usize,
    soft_failures: usize,
    reports: Vec<DeviationReport>,
}

fn emit<T: Serialize>(value: &T, dir: Option<&Path>, file: &str) -> Result<(), CliError> {
    print!("{}", to_json(value));
    if let Some(dir) = dir {
        write_json(dir.join(file), value)?;
    }
    Ok(())
}

fn check(common: &Common) -> Result<(), CliError> {
    let config = common.load()?;
    let s = &config.structure;
    let uniform = Belief::uniform(s.num_states());
    let prior_state = MarketState::new(config.prior.clone(), s, config.eta)?;
    let audit = AzcAuditConfig {
        seed: config.seed,
        ..AzcAuditConfig::default()
    };
    let report = CheckReport {
        pairwise_informative: is_pairwise_informative(s, PI_TOL),
        mlrp: is_mlrp(s, false),
        strict_mlrp: is_mlrp(s, true),
        cascade_at_uniform: is_cascade_belief(s, &uniform, CASCADE_TOL),
        uniform_max_movement: max_movement(s, &uniform),
        cascade_at_prior: detect_cascade(&prior_state.partition),
        azc: azc_audit_with(s, &audit),
    };
    emit(&report, common.output_dir()?, "check.json")
}

fn parse_belief(text: &str) -> Result<Belief, CliError> {
    let weights = text
        .split(',')
        .map(|w| {
            w.trim()
                .parse::<f64>()
                .map_err(|e| CliError::Usage(format!("bad belief weight `{w}`: {e}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Belief::new(weights)?)
}

fn quotes(common: &Common, belief: Option<&str>) -> Result<(), CliError> {
    let config = common.load()?;
    let s = &config.structure;
    let belief = match belief {
        Some(text) => parse_belief(text)?,
        None => config.prior.clone(),
    };
    let state = MarketState::new(belief.clone(), s, config.eta)?;
    let values = s.posterior_values(&belief);
    let report = QuotesReport {
        belief: belief.weights().to_vec(),
        eta: config.eta.value(),
        expectation: state.expectation(s),
        bid: state.quotes.bid,
        ask: state.quotes.ask,
        spread: state.quotes.spread(),
        partition: (0..s.num_signals())
            .map(|i| SignalAction {
                signal: s.signals().label(i),
                posterior_value: values[i],
                action: state.partition.action_of(i),
            })
            .collect(),
        cascade: detect_cascade(&state.partition),
    };
    emit(&report, common.output_dir()?, "quotes.json")
}

fn simulate(common: &Common, plots: bool) -> Result<(), CliError> {
    let config = common.load()?;
    let dir = common.output_dir()?;
    if plots && dir.is_none() {
        return Err(CliError::Usage("--plots needs --output".into()));
    }
    let results = run_episodes(&config)?;
    let summary = summarize(&config, &results);
    if let Some(dir) = dir {
        write_episodes_csv(
            dir.join("episodes.csv"),
            &results,
            &config.structure,
            config.convergence_tol,
        )?;
        write_paths_csv(dir.join("paths.csv"), &results, config.belief_thin)?;
        write_json(dir.join("scenario.json"), &Scenario::from(&config))?;
        if plots {
            plots::emit_plots(&results, &config.structure, config.convergence_tol, dir)?;
        }
    }
    emit(&summary, dir, "summary.json")
}

fn compare(common: &Common) -> Result<(), CliError> {
    let config = common.load()?;
    let comparison = compare_modes(&config)?;
    emit(&comparison, common.output_dir()?, "compare.json")
}

fn cascade_scan(common: &Common, c_points: usize) -> Result<(), CliError> {
    if c_points == 0 {
        return Err(CliError::Usage("--c-points must be at least 1".into()));
    }
    let config = common.load()?;
    let s = &config.structure;
    let (lo, hi) = (s.states().min(), s.states().max());
    let entries = (0..c_points)
        .map(|k| {
            let c = lo + (hi - lo) * (k as f64 + 0.5) / c_points as f64;
            let set = find_cascade_beliefs(s, c, CASCADE_TOL)?;
            Ok(ScanEntry {
                c,
                full_support: set.full_support().count(),
                set,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    emit(&entries, common.output_dir()?, "cascade_scan.json")
}

fn verify(common: &Common) -> Result<(), CliError> {
    let seed = common.seed.unwrap_or(0);
    let suite = SuiteConfig {
        seed,
        ..SuiteConfig::default()
    };
    let mut reports = run_suite(&suite);
    if common.scenario.is_some() {
        let config = common.load()?;
        let s = &config.structure;
        if s.num_states() <= 3 && is_pairwise_informative(s, PI_TOL).holds {
            let mut r = check_limit_support_3state(s, config.eta, &suite.limit)?;
            r.check = format!("{}_scenario", r.check);
            reports.push(r);
        }
    }
    let hard_failures = reports.iter().filter(|r| r.hard && !r.pass).count();
    let soft_failures = reports.iter().filter(|r| !r.hard && !r.pass).count();
    let report = VerifyReport {
        seed,
        hard_failures,
        soft_failures,
        reports,
    };
    emit(&report, common.output_dir()?, "verify.json")?;
    if hard_failures > 0 {
        return Err(CliError::VerifyFailed {
            failed: hard_failures,
        });
    }
    Ok(())
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| {
            CliError::Usage(format!(
                "{THREADS_ENV} must be a positive integer, got `{value}`"
            ))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn run(cli: &Cli) -> Result<(), CliError> {
    configure_threads()?;
    match &cli.command {
        Command::Check(common) => check(common),
        Command::Quotes { common, belief } => quotes(common, belief.as_deref()),
        Command::Simulate { common, plots } => simulate(common, *plots),
        Command::Compare(common) => compare(common),
        Command::CascadeScan { common, c_points } => cascade_scan(common, *c_points),
        Command::Verify(common) => verify(common),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            if std::env::args().any(|a| a == "--json-errors") {
                CliError::Usage(e.render().to_string().trim().to_string()).report(true);
            } else {
                let _ = e.print();
            }
            return ExitCode::from(1);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            e.report(cli.json_errors);
            ExitCode::from(e.exit_code())
        }
    }
}
