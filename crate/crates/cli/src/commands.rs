//! The subcommands. Each returns the process exit code on success; errors
//! are reported by the caller with exit code 1.

use crate::config::{Format, Scenario};
use crate::output::{emit, trajectory_table, Table};
use anyhow::{bail, Context, Result};
use geoatt::analysis::{
    classify_equilibrium, kernel_dimension, kernel_dimension_by_constraints, linearization_matrix, lyapunov,
    monte_carlo_basin, predicted_identity_spectrum, BasinConfig, EquilibriumKind, EquilibriumSplit,
    InitialCondition, SpectrumSummary, EQUILIBRIUM_TOL,
};
use geoatt::exact::{verify_block_relations, ExactSo3Solution};
use geoatt::integrator::{simulate, SimulationSpec, Trajectory};
use geoatt::presets::FRAME_SNAPSHOT_TIMES;
use geoatt::ClosedLoopConfig;
use serde_json::json;
use std::fmt::Write as _;
use std::path::PathBuf;

pub const EXIT_OK: u8 = 0;
pub const EXIT_NO_CONVERGENCE: u8 = 2;
pub const EXIT_BASIN_FAILURES: u8 = 3;

/// Maximum exact-vs-numeric gap accepted by `compare`.
pub const COMPARE_TOL: f64 = 1e-5;
/// Samples per unit time in figure data.
pub const FIGURE_DENSITY: f64 = 200.0;
const FIGURE2_HORIZON: f64 = 5.0;

fn spec(sc: &Scenario, t_max: f64, stop_v: f64) -> SimulationSpec {
    SimulationSpec::new(ClosedLoopConfig::new(sc.proj.clone()), sc.r0.clone())
        .dt(sc.dt)
        .t_max(t_max)
        .stop_v(stop_v)
        .method(sc.method)
}

pub fn simulate_cmd(sc: &Scenario) -> Result<u8> {
    let traj = simulate(&spec(sc, sc.t_max_or(10.0), sc.stop_v))?;
    let table = trajectory_table(&traj);
    emit(&table.render(sc.format)?, sc.out.as_deref())?;
    let last = traj.last();
    log::info!("t = {}, V = {:e}, converged = {}", last.t, last.v, traj.converged);
    Ok(if traj.converged { EXIT_OK } else { EXIT_NO_CONVERGENCE })
}

fn require_so3(sc: &Scenario, what: &str) -> Result<()> {
    if sc.n != 3 {
        bail!("n: {what} needs n = 3, got {}", sc.n);
    }
    Ok(())
}

pub fn compare_cmd(sc: &Scenario) -> Result<u8> {
    require_so3(sc, "compare")?;
    let exact = ExactSo3Solution::new(&sc.r0, &sc.proj).context("r0: exact solution undefined")?;
    // the full horizon, regardless of the stopping threshold
    let traj = simulate(&spec(sc, sc.t_max_or(10.0), 0.0))?;
    let mut cols = vec!["t".to_string(), "err_fro".to_string()];
    for i in 1..=3 {
        for j in 1..=3 {
            cols.push(format!("d_r{i}{j}"));
        }
    }
    cols.push("d_V".into());
    let mut table = Table::new(cols);
    let mut max_err = 0.0f64;
    for s in &traj.samples {
        let r = exact.at(s.t)?;
        let diff = r.matrix() - s.state.matrix();
        let err = diff.norm();
        max_err = max_err.max(err);
        let mut row = vec![s.t, err];
        for i in 0..3 {
            for j in 0..3 {
                row.push(diff[(i, j)]);
            }
        }
        row.push(lyapunov(&r) - s.v);
        table.push(row);
    }
    emit(&table.render(sc.format)?, sc.out.as_deref())?;
    eprintln!("max error: {max_err:e}");
    Ok(if max_err <= COMPARE_TOL { EXIT_OK } else { EXIT_NO_CONVERGENCE })
}

fn nearest_sample(traj: &Trajectory, t: f64) -> usize {
    ((t / traj.dt).round() as usize).min(traj.len() - 1)
}

fn figure_stride(dt: f64) -> usize {
    ((1.0 / (FIGURE_DENSITY * dt)).round() as usize).max(1)
}

pub fn figures_cmd(sc: &Scenario) -> Result<u8> {
    require_so3(sc, "figures")?;
    let dir = sc.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let horizon = sc.t_max_or(FIGURE2_HORIZON).max(FRAME_SNAPSHOT_TIMES[3]);
    let traj = simulate(&spec(sc, horizon, 0.0))?;
    let stride = figure_stride(traj.dt);

    let mut fig1 = String::from("kind,t,axis,x,y,z\n");
    let frame_row = |kind: &str, idx: usize, out: &mut String| {
        let s = &traj.samples[idx];
        for axis in 0..3 {
            let c = s.state.matrix().column(axis);
            writeln!(out, "{kind},{:?},{},{:?},{:?},{:?}", s.t, axis + 1, c[0], c[1], c[2]).expect("string write");
        }
    };
    for &t in &FRAME_SNAPSHOT_TIMES {
        frame_row("frame", nearest_sample(&traj, t), &mut fig1);
    }
    let path_end = nearest_sample(&traj, FRAME_SNAPSHOT_TIMES[3]);
    for idx in (0..=path_end).step_by(stride) {
        frame_row("path", idx, &mut fig1);
    }

    let mut cols = vec!["t".to_string()];
    cols.extend((1..=3).map(|i| format!("err_axis_{i}")));
    cols.extend((1..=3).map(|i| format!("dist_axis_{i}")));
    let mut fig2 = Table::new(cols);
    let end = nearest_sample(&traj, sc.t_max_or(FIGURE2_HORIZON));
    for idx in (0..=end).step_by(stride) {
        let s = &traj.samples[idx];
        let mut row = vec![s.t];
        row.extend(&s.axis_error);
        row.extend(&s.traveled);
        fig2.push(row);
    }

    std::fs::write(dir.join("figure1.csv"), fig1)?;
    std::fs::write(dir.join("figure2.csv"), fig2.to_csv())?;
    std::fs::write(dir.join("figure1.gp"), FIGURE1_GP)?;
    std::fs::write(dir.join("figure2.gp"), FIGURE2_GP)?;
    Ok(EXIT_OK)
}

const FIGURE1_GP: &str = r#"set datafile separator ','
set view equal xyz
set parametric
set isosamples 24
set urange [0:2*pi]
set vrange [-pi/2:pi/2]
set key off
splot cos(u)*cos(v), sin(u)*cos(v), sin(v) lc rgb '#dddddd', \
  for [a=1:3] 'figure1.csv' using ($3==a && strcol(1) eq 'path' ? $4 : NaN):5:6 with lines lw 2, \
  'figure1.csv' using (strcol(1) eq 'frame' ? $4 : NaN):5:6 with points pt 7
"#;

const FIGURE2_GP: &str = r#"set datafile separator ','
set xlabel 't'
set key top right
plot for [i=1:3] 'figure2.csv' using 1:(column(1+i)) with lines lw 2 title sprintf('arccos R_{%d%d}', i, i), \
     for [i=1:3] 'figure2.csv' using 1:(column(4+i)) with lines dt 2 title sprintf('traveled e_%d', i)
"#;

pub fn analyze_cmd(sc: &Scenario) -> Result<u8> {
    let class = classify_equilibrium(&sc.r0, &sc.proj, EQUILIBRIUM_TOL);
    let mut report = json!({
        "n": sc.n,
        "k": sc.proj.k(),
        "rank": sc.proj.rank(),
        "lyapunov": lyapunov(&sc.r0),
        "classification": class,
    });
    if class.is_equilibrium() {
        let lin = linearization_matrix(&sc.r0, &sc.proj)?;
        let spec = lin.spectrum()?;
        let summary = SpectrumSummary::from_values(spec.values(), 1e-6);
        let hyperbolic = spec.values().iter().filter(|z| z.re.abs() > 1e-8).count();
        let split = EquilibriumSplit::of(&sc.r0, &sc.proj)?;
        report["spectrum"] = json!(summary);
        report["kernel_dimension"] = json!(kernel_dimension(&sc.r0, &sc.proj)?);
        report["kernel_dimension_constraints"] = json!(kernel_dimension_by_constraints(&sc.r0, &sc.proj)?);
        report["split"] = json!(split);
        report["nonzero_eigenvalues"] = json!({
            "computed": hyperbolic,
            "predicted": split.nonzero_eigenvalues(),
        });
        report["unstable_eigenvalues"] = json!(spec.values().iter().filter(|z| z.re > 1e-8).count());
        if class.kind == EquilibriumKind::Identity {
            let predicted = predicted_identity_spectrum(sc.n, sc.proj.rank(), sc.proj.k())?;
            report["predicted_spectrum"] = json!(predicted
                .iter()
                .map(|&(value, multiplicity)| json!({"value": value, "multiplicity": multiplicity}))
                .collect::<Vec<_>>());
        }
    }
    if sc.n == 3 {
        let res = verify_block_relations(&sc.r0)?;
        report["block_residuals"] = json!({
            "outer_product": res.outer_product,
            "trace_circle": res.trace_circle,
            "skew_part": res.skew_part,
        });
    }
    emit(&(serde_json::to_string_pretty(&report)? + "\n"), sc.out.as_deref())?;
    Ok(EXIT_OK)
}

pub fn montecarlo_cmd(sc: &Scenario) -> Result<u8> {
    let mut cfg = BasinConfig::new(sc.samples.unwrap_or(1000), sc.seed);
    cfg.dt = sc.dt;
    cfg.t_max = sc.t_max_or(40.0);
    cfg.stop_v = sc.stop_v;
    cfg.method = sc.method;
    if sc.r0_explicit {
        cfg.initial = InitialCondition::Fixed(sc.r0.clone());
    }
    let report = monte_carlo_basin(sc.n, &sc.proj, &cfg)?;
    let text = match sc.format {
        Format::Json | Format::Csv => serde_json::to_string_pretty(&report)? + "\n",
    };
    emit(&text, sc.out.as_deref())?;
    Ok(if report.all_converged() { EXIT_OK } else { EXIT_BASIN_FAILURES })
}
