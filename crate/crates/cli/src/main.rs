use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use argus_core::incentive::{legacy_reward, to_f64, units};
use argus_core::{ExactSchedule, SecureGroup, Z101};
use clap::{Parser, Subcommand};
use serde::Serialize;

mod bench;
mod commands;
mod config;
mod output;

use config::{config_error, Backend, ConfigError, ScenarioConfig};

#[derive(Parser)]
#[command(name = "argus", version, about = "Simulate watermark licensing campaigns with informer bounties")]
struct Cli {
    /// Scenario TOML file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// RNG seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// TOML gas table; replaces the config's `[gas]`.
    #[arg(long, global = true)]
    gas_schedule: Option<PathBuf>,
    /// Group backend; overrides the config.
    #[arg(long, global = true, value_enum)]
    backend: Option<Backend>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Deploy the contract, build the id tree and deposit bounties.
    Init,
    /// Share copies with licensees.
    Trade {
        /// Only this licensee (1-based); default all.
        #[arg(long)]
        licensee: Option<u32>,
    },
    /// Leak one licensee's copy and have informers report it.
    Report {
        #[arg(long, default_value_t = 1)]
        licensee: u32,
        #[arg(long, default_value_t = 1)]
        informers: u32,
    },
    /// Falsely accuse a licensee and file its appeal.
    Appeal {
        #[arg(long, default_value_t = 1)]
        licensee: u32,
        /// Also price the full-list appeal.
        #[arg(long)]
        baseline: bool,
    },
    /// Play the scenario's strategy assignment and check every party's guarantee.
    Run,
    /// Reward per informer for both payout rules.
    RewardCurve {
        /// Bounty ceiling.
        #[arg(long, default_value_t = 1_000_000)]
        c: u128,
        #[arg(long, default_value_t = 20)]
        guarantee_len: usize,
        /// Final report counts; `inf` is always appended.
        #[arg(long, value_delimiter = ',', default_value = "1,2,5,10,20")]
        n: Vec<usize>,
    },
    /// Parameter sweeps.
    Bench {
        #[arg(long, value_enum)]
        dimension: bench::Dimension,
        /// Comma-separated values; a per-dimension default otherwise.
        #[arg(long, value_delimiter = ',')]
        sweep: Option<Vec<u32>>,
        /// Payload bytes per version.
        #[arg(long, default_value_t = 4096)]
        payload: usize,
    },
}

#[derive(Serialize)]
struct CurveRow {
    model: &'static str,
    i: usize,
    n: String,
    reward: String,
}

const CURVE_MAX_I: usize = 20;

fn reward_curve(c: u128, guarantee_len: usize, ns: &[usize], out: &Path) -> anyhow::Result<()> {
    if ns.contains(&0) {
        return Err(config_error("--n values must be positive"));
    }
    let schedule = ExactSchedule::geometric(units(c), guarantee_len)?;
    let fmt = |x: f64| format!("{x:.6}");
    let mut rows = Vec::new();
    for &n in ns {
        for i in 1..=n.min(CURVE_MAX_I) {
            let n_s = n.to_string();
            rows.push(CurveRow { model: "argus", i, n: n_s.clone(), reward: fmt(to_f64(&schedule.reward(i, n)?)) });
            rows.push(CurveRow { model: "legacy", i, n: n_s, reward: fmt(to_f64(&legacy_reward(&units(c), n))) });
        }
    }
    for i in 1..=CURVE_MAX_I {
        rows.push(CurveRow { model: "argus", i, n: "inf".into(), reward: fmt(to_f64(&schedule.immediate(i))) });
        rows.push(CurveRow { model: "legacy", i, n: "inf".into(), reward: fmt(0.0) });
    }
    output::write_csv(out, "reward-curve.csv", &rows)
}

fn scenario(cli: &Cli) -> anyhow::Result<ScenarioConfig> {
    let path = cli.config.as_ref().ok_or_else(|| config_error("this command needs --config <scenario.toml>"))?;
    let mut cfg = ScenarioConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = Some(seed);
    }
    if let Some(gas) = &cli.gas_schedule {
        cfg.load_gas(gas)?;
    }
    if let Some(b) = cli.backend {
        cfg.backend = Some(b);
    }
    cfg.validate()?;
    Ok(cfg)
}

macro_rules! dispatch {
    ($backend:expr, $f:ident($($arg:expr),*)) => {
        match $backend {
            Backend::Secure => commands::$f::<SecureGroup>($($arg),*),
            Backend::Tiny => commands::$f::<Z101>($($arg),*),
        }
    };
}

/// Ok(false) when a scenario ran but some assertion failed.
fn execute(cli: &Cli) -> anyhow::Result<bool> {
    let out = cli.out.as_path();
    match &cli.command {
        Command::RewardCurve { c, guarantee_len, n } => reward_curve(*c, *guarantee_len, n, out)?,
        Command::Bench { dimension, sweep, payload } => {
            let sweep = sweep.clone().unwrap_or_else(|| dimension.default_sweep());
            bench::run(*dimension, &sweep, *payload, cli.seed.unwrap_or(0), out)?
        }
        cmd => {
            let cfg = scenario(cli)?;
            let backend = cfg.backend.unwrap_or_default();
            match cmd {
                Command::Init => dispatch!(backend, init(&cfg, out))?,
                Command::Trade { licensee } => dispatch!(backend, trade(&cfg, *licensee, out))?,
                Command::Report { licensee, informers } => {
                    dispatch!(backend, report(&cfg, *licensee, *informers, out))?
                }
                Command::Appeal { licensee, baseline } => dispatch!(backend, appeal(&cfg, *licensee, *baseline, out))?,
                Command::Run => return dispatch!(backend, run(&cfg, out)).context("scenario run"),
                _ => unreachable!("handled above"),
            }
        }
    }
    Ok(true)
}

fn is_config_error(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        c.is::<ConfigError>()
            || matches!(
                c.downcast_ref::<argus_core::Error>(),
                Some(argus_core::Error::Config(_) | argus_core::Error::InvalidArgument(_))
            )
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: some assertions failed; see {}", cli.out.join("outcome.json").display());
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if is_config_error(&e) { 2 } else { 3 })
        }
    }
}
