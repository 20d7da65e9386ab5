//! Scenario configuration: a JSON document, optionally a named preset, with
//! command-line overrides applied on top.

use anyhow::{bail, Context, Result};
use geoatt::integrator::{Method, DEFAULT_DT, DEFAULT_STOP_V};
use geoatt::manifold::{haar_sample, Mat, Vector};
use geoatt::presets::{example_projection, example_r0};
use geoatt::{ProjectionPair, RotationMatrix};
use serde::Deserialize;
use std::path::{Path, PathBuf};

pub const PAPER_PRESET: &str = "paper-sec8";

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ProjectionSource {
    /// Diagonal 0/1 mask.
    Mask(Vec<bool>),
    Matrix(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSource {
    Identity,
    Matrix(Vec<Vec<f64>>),
    Preset(String),
    HaarSeed(u64),
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// The on-disk scenario; every field is optional.
#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub preset: Option<String>,
    pub n: Option<usize>,
    pub projection: Option<ProjectionSource>,
    pub k: Option<f64>,
    pub r0: Option<InitialSource>,
    pub dt: Option<f64>,
    pub t_max: Option<f64>,
    pub stop_v: Option<f64>,
    pub method: Option<Method>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

impl ScenarioFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Fields set in `other` replace those in `self`.
    pub fn overlay(mut self, other: ScenarioFile) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(preset, n, projection, k, r0, dt, t_max, stop_v, method, seed, samples, out, format);
        self
    }
}

/// A validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub n: usize,
    pub proj: ProjectionPair,
    pub r0: RotationMatrix,
    /// true when R₀ was given explicitly rather than drawn or preset
    pub r0_explicit: bool,
    pub dt: f64,
    pub t_max: Option<f64>,
    pub stop_v: f64,
    pub method: Method,
    pub seed: u64,
    pub samples: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Format,
}

fn square(rows: &[Vec<f64>], field: &str) -> Result<Mat> {
    let n = rows.len();
    if n == 0 {
        bail!("{field}: empty matrix");
    }
    if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
        bail!("{field}: row {} has {} entries, expected {n}", i + 1, row.len());
    }
    Ok(Mat::from_fn(n, n, |i, j| rows[i][j]))
}

impl Scenario {
    pub fn resolve(file: ScenarioFile) -> Result<Self> {
        let preset = match file.preset.as_deref() {
            None => false,
            Some(PAPER_PRESET) => true,
            Some(other) => bail!("preset: unknown preset {other:?} (known: {PAPER_PRESET})"),
        };
        let k = file.k.unwrap_or(1.0);
        if !(k > 0.0 && k.is_finite()) {
            bail!("k: gain must be positive and finite, got {k}");
        }

        let mut r0_explicit = false;
        let r0 = match &file.r0 {
            Some(InitialSource::Identity) => {
                r0_explicit = true;
                None
            }
            Some(InitialSource::Matrix(rows)) => {
                r0_explicit = true;
                Some(RotationMatrix::new(square(rows, "r0")?).context("r0")?)
            }
            Some(InitialSource::Preset(name)) if name == PAPER_PRESET => Some(example_r0()),
            Some(InitialSource::Preset(name)) => bail!("r0: unknown preset {name:?}"),
            Some(InitialSource::HaarSeed(_)) => None,
            None if preset => Some(example_r0()),
            None => None,
        };

        let proj_matrix = match &file.projection {
            Some(ProjectionSource::Mask(mask)) => {
                let d: Vec<f64> = mask.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
                Some(Mat::from_diagonal(&Vector::from_vec(d)))
            }
            Some(ProjectionSource::Matrix(rows)) => Some(square(rows, "projection")?),
            None if preset => Some(example_projection(1.0).p().clone()),
            None => None,
        };

        let n = file
            .n
            .or(r0.as_ref().map(|r| r.dim()))
            .or(proj_matrix.as_ref().map(|p| p.nrows()))
            .unwrap_or(3);
        if n < 2 {
            bail!("n: dimension must be at least 2, got {n}");
        }
        let seed = file.seed.unwrap_or(0);
        let r0 = match (r0, &file.r0) {
            (Some(r), _) => r,
            (None, Some(InitialSource::Identity)) => RotationMatrix::identity(n),
            (None, Some(InitialSource::HaarSeed(s))) => haar_sample(n, *s),
            (None, _) => haar_sample(n, seed),
        };
        if r0.dim() != n {
            bail!("r0: dimension {} does not match n = {n}", r0.dim());
        }
        let proj_matrix = proj_matrix.unwrap_or_else(|| {
            let mut m = Mat::zeros(n, n);
            m[(0, 0)] = 1.0;
            m
        });
        if proj_matrix.nrows() != n {
            bail!("projection: dimension {} does not match n = {n}", proj_matrix.nrows());
        }
        let proj = ProjectionPair::new(proj_matrix, k).context("projection")?;

        let dt = file.dt.unwrap_or(DEFAULT_DT);
        if !(dt > 0.0 && dt.is_finite()) {
            bail!("dt: step must be positive and finite, got {dt}");
        }
        if let Some(t) = file.t_max {
            if !(t.is_finite() && t >= dt) {
                bail!("t_max: horizon must be finite and at least dt, got {t}");
            }
        }
        let stop_v = file.stop_v.unwrap_or(DEFAULT_STOP_V);
        if !(stop_v >= 0.0 && stop_v.is_finite()) {
            bail!("stop_v: threshold must be non-negative, got {stop_v}");
        }
        if file.samples == Some(0) {
            bail!("samples: at least one sample is required");
        }
        Ok(Scenario {
            n,
            proj,
            r0,
            r0_explicit,
            dt,
            t_max: file.t_max,
            stop_v,
            method: file.method.unwrap_or_default(),
            seed,
            samples: file.samples,
            out: file.out,
            format: file.format.unwrap_or_default(),
        })
    }

    pub fn t_max_or(&self, default: f64) -> f64 {
        self.t_max.unwrap_or(default)
    }
}
