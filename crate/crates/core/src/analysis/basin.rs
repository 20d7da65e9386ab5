//! Monte Carlo estimate of the basin of attraction of the identity.

use crate::error::Result;
use crate::feedback::ClosedLoopConfig;
use crate::integrator::{run_to_end, Method, SimulationSpec, DEFAULT_DT, DEFAULT_STOP_V};
use crate::manifold::{haar_sample, ProjectionPair, RotationMatrix};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    /// Independent Haar draws.
    Haar,
    /// Every sample starts at the same attitude.
    Fixed(RotationMatrix),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasinConfig {
    pub samples: usize,
    pub seed: u64,
    pub dt: f64,
    pub t_max: f64,
    pub stop_v: f64,
    pub method: Method,
    pub initial: InitialCondition,
}

impl BasinConfig {
    pub fn new(samples: usize, seed: u64) -> Self {
        BasinConfig {
            samples,
            seed,
            dt: DEFAULT_DT,
            t_max: 40.0,
            stop_v: DEFAULT_STOP_V,
            method: Method::default(),
            initial: InitialCondition::Haar,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BasinFailure {
    pub seed: u64,
    pub final_v: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BasinReport {
    pub samples: usize,
    pub converged: usize,
    pub failures: Vec<BasinFailure>,
    pub t_max: f64,
    pub dt: f64,
    pub stop_v: f64,
}

impl BasinReport {
    pub fn all_converged(&self) -> bool {
        self.converged == self.samples
    }
}

/// Seed of sample `index`; distinct indices give distinct seeds.
pub fn sample_seed(base: u64, index: usize) -> u64 {
    base.wrapping_mul(1_000_003).wrapping_add(index as u64)
}

/// Simulates `cfg.samples` initial conditions in parallel. The result depends
/// only on the configuration, not on thread scheduling.
pub fn monte_carlo_basin(n: usize, proj: &ProjectionPair, cfg: &BasinConfig) -> Result<BasinReport> {
    let closed = ClosedLoopConfig::new(proj.clone());
    let runs: Vec<(u64, f64, bool)> = (0..cfg.samples)
        .into_par_iter()
        .map(|idx| {
            let seed = sample_seed(cfg.seed, idx);
            let r0 = match &cfg.initial {
                InitialCondition::Haar => haar_sample(n, seed),
                InitialCondition::Fixed(r) => r.clone(),
            };
            let spec = SimulationSpec::new(closed.clone(), r0)
                .dt(cfg.dt)
                .t_max(cfg.t_max)
                .stop_v(cfg.stop_v)
                .method(cfg.method);
            let out = run_to_end(&spec)?;
            Ok((seed, out.v, out.converged))
        })
        .collect::<Result<_>>()?;
    let converged = runs.iter().filter(|r| r.2).count();
    let failures = runs
        .iter()
        .filter(|r| !r.2)
        .map(|&(seed, final_v, _)| BasinFailure { seed, final_v })
        .collect();
    Ok(BasinReport {
        samples: cfg.samples,
        converged,
        failures,
        t_max: cfg.t_max,
        dt: cfg.dt,
        stop_v: cfg.stop_v,
    })
}
