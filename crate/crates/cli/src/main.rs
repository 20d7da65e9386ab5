//! `geoatt`: simulate, compare, plot and analyze geodesic attitude feedback.
//!
//! Exit codes: 0 converged or passed, 1 invalid input, 2 no convergence (or
//! a failed comparison), 3 Monte Carlo failures.

mod commands;
mod config;
mod output;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use config::{Format, Scenario, ScenarioFile};
use geoatt::integrator::Method;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "geoatt", version, about = "Geodesic attitude feedback on SO(n)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Overrides,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Integrate the closed loop and write the trajectory
    Simulate,
    /// Compare the exact SO(3) solution with the integrator
    Compare,
    /// Write the example figure data and gnuplot scripts into --out (a directory)
    Figures,
    /// Classify R0 and report the linearization spectrum
    Analyze,
    /// Estimate the basin of attraction from Haar-random starts
    Montecarlo,
}

/// Flags override the fields of the configuration file.
#[derive(clap::Args, Debug)]
struct Overrides {
    /// Scenario file (JSON)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Named scenario; `paper-sec8` is the worked three-dimensional example
    #[arg(long, global = true)]
    preset: Option<String>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    k: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    dt: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    tmax: Option<f64>,
    #[arg(long = "stop-v", global = true, allow_negative_numbers = true)]
    stop_v: Option<f64>,
    /// lie_rk4 or rk4_project
    #[arg(long, global = true)]
    method: Option<Method>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, global = true)]
    format: Option<Format>,
}

impl Overrides {
    fn scenario(self) -> Result<Scenario> {
        let base = match &self.config {
            Some(path) => ScenarioFile::load(path)?,
            None => ScenarioFile::default(),
        };
        let flags = ScenarioFile {
            preset: self.preset,
            k: self.k,
            dt: self.dt,
            t_max: self.tmax,
            stop_v: self.stop_v,
            method: self.method,
            seed: self.seed,
            samples: self.samples,
            out: self.out,
            format: self.format,
            ..Default::default()
        };
        Scenario::resolve(base.overlay(flags))
    }
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("GEOATT_THREADS") {
        let n: usize = v.parse().with_context(|| format!("GEOATT_THREADS: not a count: {v:?}"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<u8> {
    configure_threads()?;
    let sc = cli.opts.scenario()?;
    match cli.command {
        Command::Simulate => commands::simulate_cmd(&sc),
        Command::Compare => commands::compare_cmd(&sc),
        Command::Figures => commands::figures_cmd(&sc),
        Command::Analyze => commands::analyze_cmd(&sc),
        Command::Montecarlo => commands::montecarlo_cmd(&sc),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
