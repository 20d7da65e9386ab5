//! Great-circle diagnostics for rank-one projections.
//!
//! With P = e eᵀ the column R(t)e moves along the great circle through e and
//! R(0)e, so its traveled distance equals the initial geodesic distance
//! arccos⟨e, R(0)e⟩. The other axes generally take longer paths.

use crate::error::{Error, Result};
use crate::feedback::closed_loop_rhs_raw;
use crate::integrator::{SphereTrajectory, Trajectory};
use crate::manifold::{ProjectionPair, Vector};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeodesicReport {
    /// max over samples of the component of R(t)e orthogonal to span{e, R(0)e}
    pub deviation: f64,
    /// ∫‖Ṙe‖ dt along the geodesic axis
    pub geodesic_traveled: f64,
    /// arccos⟨e, R(0)e⟩
    pub geodesic_initial_distance: f64,
    /// per coordinate axis i: ∫‖Ṙeᵢ‖ dt
    pub traveled: Vec<f64>,
    /// per coordinate axis i: arccos R_ii(0)
    pub initial_distance: Vec<f64>,
}

fn rank_one_axis(proj: &ProjectionPair) -> Result<Vector> {
    if proj.rank() != 1 {
        return Err(Error::RankMismatch {
            expected: 1,
            found: proj.rank(),
        });
    }
    let p = proj.p();
    let j = (0..p.ncols())
        .max_by(|&a, &b| p[(a, a)].total_cmp(&p[(b, b)]))
        .expect("nonempty");
    let col = p.column(j).into_owned();
    let norm = col.norm();
    Ok(col / norm)
}

/// Orthonormal basis of span{e, r₀}.
fn plane(e: &Vector, r0: &Vector) -> Vec<Vector> {
    let w = r0 - e * e.dot(r0);
    let wn = w.norm();
    if wn <= 1e-12 {
        vec![e.clone()]
    } else {
        vec![e.clone(), w / wn]
    }
}

fn out_of_plane(basis: &[Vector], r: &Vector) -> f64 {
    let mut rem = r.clone();
    for b in basis {
        rem -= b * b.dot(r);
    }
    rem.norm()
}

pub fn geodesic_deviation(traj: &Trajectory, proj: &ProjectionPair) -> Result<GeodesicReport> {
    let e = rank_one_axis(proj)?;
    if traj.dim() != proj.dim() {
        return Err(Error::DimensionMismatch {
            expected: proj.dim(),
            found: traj.dim(),
        });
    }
    let first = &traj.samples[0];
    let r0e = first.state.matrix() * &e;
    let basis = plane(&e, &r0e);
    let mut deviation = 0.0f64;
    let mut traveled = 0.0;
    let mut prev_speed = None;
    let mut prev_t = first.t;
    for s in &traj.samples {
        let m = s.state.matrix();
        deviation = deviation.max(out_of_plane(&basis, &(m * &e)));
        let speed = (closed_loop_rhs_raw(m, proj) * &e).norm();
        if let Some(p) = prev_speed {
            traveled += 0.5 * (p + speed) * (s.t - prev_t);
        }
        prev_speed = Some(speed);
        prev_t = s.t;
    }
    Ok(GeodesicReport {
        deviation,
        geodesic_traveled: traveled,
        geodesic_initial_distance: e.dot(&r0e).clamp(-1.0, 1.0).acos(),
        traveled: traj.last().traveled.clone(),
        initial_distance: first.axis_error.clone(),
    })
}

/// The same diagnostics for a reduced trajectory, which always targets e₁.
pub fn sphere_geodesic_deviation(traj: &SphereTrajectory) -> GeodesicReport {
    let deviation = traj.samples.iter().map(|s| s.plane_deviation).fold(0.0, f64::max);
    let first = &traj.samples[0];
    let last = traj.last();
    GeodesicReport {
        deviation,
        geodesic_traveled: last.traveled,
        geodesic_initial_distance: first.geodesic_error,
        traveled: vec![last.traveled],
        initial_distance: vec![first.geodesic_error],
    }
}
