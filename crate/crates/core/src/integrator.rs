//! Fixed-step integration of the closed loop on SO(n) and of the reduced
//! dynamics on the sphere.
//!
//! The default scheme is a fourth-order Runge–Kutta–Munthe-Kaas method: the
//! stages live in so(n), the inverse of the exponential's differential is
//! truncated after the second commutator, and the state is advanced by left
//! multiplication with exp(Θ). The alternative classical RK4 in the ambient
//! space is followed by a polar reprojection onto SO(n).

use crate::error::{Error, Result};
use crate::feedback::{closed_loop_rhs_raw, control_u_raw, lyapunov_rate, ClosedLoopConfig};
use crate::manifold::{
    commutator, distance_to_negative_spectrum, exp_skew, Mat, RotationMatrix, SkewMatrix, UnitVector, Vector,
};
use serde::{Deserialize, Serialize};

pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_STOP_V: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    LieRk4,
    Rk4Project,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lie_rk4" | "lie-rk4" => Ok(Method::LieRk4),
            "rk4_project" | "rk4-project" => Ok(Method::Rk4Project),
            other => Err(Error::InvalidSpec(format!("unknown method {other:?}"))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::LieRk4 => "lie_rk4",
            Method::Rk4Project => "rk4_project",
        })
    }
}

#[derive(Debug, Clone)]
pub struct SimulationSpec {
    pub cfg: ClosedLoopConfig,
    pub r0: RotationMatrix,
    pub dt: f64,
    pub t_max: f64,
    pub stop_v: f64,
    pub method: Method,
}

impl SimulationSpec {
    pub fn new(cfg: ClosedLoopConfig, r0: RotationMatrix) -> Self {
        SimulationSpec {
            cfg,
            r0,
            dt: DEFAULT_DT,
            t_max: 10.0,
            stop_v: DEFAULT_STOP_V,
            method: Method::LieRk4,
        }
    }

    pub fn dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn t_max(mut self, t_max: f64) -> Self {
        self.t_max = t_max;
        self
    }

    pub fn stop_v(mut self, stop_v: f64) -> Self {
        self.stop_v = stop_v;
        self
    }

    pub fn method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidSpec(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_max.is_finite() && self.t_max >= self.dt) {
            return Err(Error::InvalidSpec(format!(
                "t_max must be finite and at least dt, got {}",
                self.t_max
            )));
        }
        if self.stop_v.is_nan() || self.stop_v < 0.0 {
            return Err(Error::InvalidSpec(format!("stop_v must be non-negative, got {}", self.stop_v)));
        }
        if self.cfg.dim() != self.r0.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.cfg.dim(),
                found: self.r0.dim(),
            });
        }
        Ok(())
    }

    fn steps(&self) -> usize {
        (self.t_max / self.dt - 1e-9).ceil() as usize
    }
}

/// One recorded instant of a closed-loop run.
#[derive(Debug, Clone)]
pub struct TrajectorySample {
    pub t: f64,
    pub state: RotationMatrix,
    /// trace(I − R)
    pub v: f64,
    pub vdot: f64,
    pub norm_u_sq: f64,
    /// arccos R_ii, one per axis
    pub axis_error: Vec<f64>,
    /// ∫₀ᵗ ‖Ṙ e_i‖ dτ, one per axis
    pub traveled: Vec<f64>,
    pub ortho_residual: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub dt: f64,
    pub samples: Vec<TrajectorySample>,
    /// true when the run stopped on V < stop_V
    pub converged: bool,
}

impl Trajectory {
    pub fn last(&self) -> &TrajectorySample {
        self.samples.last().expect("trajectory is never empty")
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.samples[0].state.dim()
    }

    /// Trapezoid estimate of ∫‖U‖²_F dt over the recorded run.
    pub fn effort_integral(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|w| 0.5 * (w[0].norm_u_sq + w[1].norm_u_sq) * (w[1].t - w[0].t))
            .sum()
    }
}

fn tangent_generator(r: &Mat, cfg: &ClosedLoopConfig) -> Mat {
    SkewMatrix::skew_part(&control_u_raw(r, cfg.proj())).into_matrix()
}

/// dexp⁻¹_Ω(A) truncated after the second commutator.
fn dexp_inv(omega: &Mat, a: &Mat) -> Mat {
    let c1 = commutator(omega, a);
    let c2 = commutator(omega, &c1);
    a - c1 * 0.5 + c2 * (1.0 / 12.0)
}

fn exp_times(theta: &Mat, r: &Mat) -> Mat {
    exp_skew(&SkewMatrix::skew_part(theta)).matrix() * r
}

fn lie_rk4_step(r: &Mat, cfg: &ClosedLoopConfig, dt: f64) -> Mat {
    let k1 = tangent_generator(r, cfg);
    let th2 = &k1 * (0.5 * dt);
    let k2 = dexp_inv(&th2, &tangent_generator(&exp_times(&th2, r), cfg));
    let th3 = &k2 * (0.5 * dt);
    let k3 = dexp_inv(&th3, &tangent_generator(&exp_times(&th3, r), cfg));
    let th4 = &k3 * dt;
    let k4 = dexp_inv(&th4, &tangent_generator(&exp_times(&th4, r), cfg));
    let theta = (k1 + (k2 + k3) * 2.0 + k4) * (dt / 6.0);
    exp_times(&theta, r)
}

/// Nearest orthogonal matrix, M (MᵀM)^{−1/2}.
fn polar_project(m: &Mat) -> Mat {
    let gram = m.transpose() * m;
    let eig = nalgebra::SymmetricEigen::new(gram);
    let inv_sqrt = eig.eigenvalues.map(|l| 1.0 / l.sqrt());
    let root = &eig.eigenvectors * Mat::from_diagonal(&inv_sqrt) * eig.eigenvectors.transpose();
    m * root
}

fn rk4_project_step(r: &Mat, cfg: &ClosedLoopConfig, dt: f64) -> Mat {
    let f = |x: &Mat| closed_loop_rhs_raw(x, cfg.proj());
    let k1 = f(r);
    let k2 = f(&(r + &k1 * (0.5 * dt)));
    let k3 = f(&(r + &k2 * (0.5 * dt)));
    let k4 = f(&(r + &k3 * dt));
    let next = r + (k1 + (k2 + k3) * 2.0 + k4) * (dt / 6.0);
    polar_project(&next)
}

/// Advances R by one step of size `dt`.
pub fn step(r: &RotationMatrix, cfg: &ClosedLoopConfig, dt: f64, method: Method) -> Result<RotationMatrix> {
    if r.dim() != cfg.dim() {
        return Err(Error::DimensionMismatch {
            expected: cfg.dim(),
            found: r.dim(),
        });
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidSpec(format!("dt must be positive, got {dt}")));
    }
    step_raw(r.matrix(), cfg, dt, method, 0.0).map(RotationMatrix::from_matrix_unchecked)
}

fn step_raw(r: &Mat, cfg: &ClosedLoopConfig, dt: f64, method: Method, t: f64) -> Result<Mat> {
    let next = match method {
        Method::LieRk4 => lie_rk4_step(r, cfg, dt),
        Method::Rk4Project => rk4_project_step(r, cfg, dt),
    };
    if next.iter().any(|x| !x.is_finite()) {
        return Err(Error::StepRejected { t });
    }
    Ok(next)
}

fn warn_if_near_unstable_set(r0: &RotationMatrix) {
    if let Ok(d) = distance_to_negative_spectrum(r0) {
        if d <= 1e-12 {
            log::warn!("initial attitude lies within {d:e} of the set with -1 in its spectrum");
        }
    }
}

fn sample_at(t: f64, r: &Mat, cfg: &ClosedLoopConfig, traveled: Vec<f64>) -> (TrajectorySample, Vec<f64>) {
    let n = r.nrows();
    let u = control_u_raw(r, cfg.proj());
    let rhs = closed_loop_rhs_raw(r, cfg.proj());
    let speeds: Vec<f64> = (0..n).map(|i| rhs.column(i).norm()).collect();
    let sample = TrajectorySample {
        t,
        state: RotationMatrix::from_matrix_unchecked(r.clone()),
        v: n as f64 - r.trace(),
        vdot: lyapunov_rate(r, cfg.proj()),
        norm_u_sq: u.norm_squared(),
        axis_error: (0..n).map(|i| r[(i, i)].clamp(-1.0, 1.0).acos()).collect(),
        traveled,
        ortho_residual: crate::manifold::orthogonality_residual(r),
    };
    (sample, speeds)
}

/// Integrates until `t_max` or until V < `stop_v`, recording every step.
pub fn simulate(spec: &SimulationSpec) -> Result<Trajectory> {
    spec.validate()?;
    warn_if_near_unstable_set(&spec.r0);
    let n = spec.r0.dim();
    let mut r = spec.r0.matrix().clone();
    let (first, mut speeds) = sample_at(0.0, &r, &spec.cfg, vec![0.0; n]);
    let mut converged = first.v < spec.stop_v;
    let mut samples = vec![first];
    if !converged {
        for j in 1..=spec.steps() {
            let t_prev = (j - 1) as f64 * spec.dt;
            r = step_raw(&r, &spec.cfg, spec.dt, spec.method, t_prev)?;
            let t = j as f64 * spec.dt;
            let prev = samples.last().expect("nonempty");
            let (_, new_speeds) = sample_at(t, &r, &spec.cfg, Vec::new());
            let traveled: Vec<f64> = prev
                .traveled
                .iter()
                .zip(speeds.iter().zip(&new_speeds))
                .map(|(d, (a, b))| d + 0.5 * (a + b) * spec.dt)
                .collect();
            let (sample, _) = sample_at(t, &r, &spec.cfg, traveled);
            speeds = new_speeds;
            converged = sample.v < spec.stop_v;
            samples.push(sample);
            if converged {
                break;
            }
        }
    }
    Ok(Trajectory {
        dt: spec.dt,
        samples,
        converged,
    })
}

/// Outcome of a run that only keeps the final state.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub state: RotationMatrix,
    pub t: f64,
    pub v: f64,
    pub converged: bool,
}

/// Same stopping rule as [`simulate`] without recording the path.
pub fn run_to_end(spec: &SimulationSpec) -> Result<RunOutcome> {
    spec.validate()?;
    let n = spec.r0.dim() as f64;
    let mut r = spec.r0.matrix().clone();
    let mut v = n - r.trace();
    let mut t = 0.0;
    if v >= spec.stop_v {
        for j in 1..=spec.steps() {
            r = step_raw(&r, &spec.cfg, spec.dt, spec.method, t)?;
            t = j as f64 * spec.dt;
            v = n - r.trace();
            if v < spec.stop_v {
                break;
            }
        }
    }
    Ok(RunOutcome {
        state: RotationMatrix::from_matrix_unchecked(r),
        t,
        v,
        converged: v < spec.stop_v,
    })
}

/// States of a closed-loop run at the requested times (ascending), using
/// steps of at most `dt` and landing exactly on each requested time.
pub fn states_at(
    cfg: &ClosedLoopConfig,
    r0: &RotationMatrix,
    times: &[f64],
    dt: f64,
    method: Method,
) -> Result<Vec<RotationMatrix>> {
    let mut r = r0.matrix().clone();
    let mut t = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        if target < t {
            return Err(Error::InvalidSpec("sample times must be ascending and non-negative".into()));
        }
        let span = target - t;
        let steps = (span / dt - 1e-9).ceil().max(0.0) as usize;
        if steps > 0 {
            let h = span / steps as f64;
            for _ in 0..steps {
                r = step_raw(&r, cfg, h, method, t)?;
                t += h;
            }
        }
        t = target;
        out.push(RotationMatrix::from_matrix_unchecked(r.clone()));
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct SphereSample {
    pub t: f64,
    pub state: UnitVector,
    /// arccos⟨e₁, r⟩
    pub geodesic_error: f64,
    /// norm of the part of r outside span{e₁, r₀}
    pub plane_deviation: f64,
    /// ∫₀ᵗ ‖ṙ‖ dτ
    pub traveled: f64,
}

#[derive(Debug, Clone)]
pub struct SphereTrajectory {
    pub dt: f64,
    pub samples: Vec<SphereSample>,
}

impl SphereTrajectory {
    pub fn last(&self) -> &SphereSample {
        self.samples.last().expect("trajectory is never empty")
    }
}

/// Orthonormal basis of span{e₁, r₀} (just e₁ when r₀ = ±e₁).
fn plane_basis(r0: &Vector) -> Vec<Vector> {
    let n = r0.len();
    let e1 = Vector::from_fn(n, |i, _| if i == 0 { 1.0 } else { 0.0 });
    let w = r0 - &e1 * r0[0];
    let wn = w.norm();
    if wn <= 1e-14 {
        vec![e1]
    } else {
        vec![e1, w / wn]
    }
}

fn reduced_field(r: &Vector) -> Vector {
    let mut d = -r * r[0];
    d[0] += 1.0;
    d
}

/// Integrates ṙ = e₁ − ⟨e₁, r⟩ r with RK4 and renormalization.
pub fn simulate_reduced(r0: &UnitVector, dt: f64, t_max: f64) -> Result<SphereTrajectory> {
    if !(dt > 0.0 && dt.is_finite() && t_max.is_finite() && t_max >= dt) {
        return Err(Error::InvalidSpec(format!("bad step {dt} or horizon {t_max}")));
    }
    let v0 = r0.vector().clone();
    if (v0[0] + 1.0).abs() <= 1e-9 {
        log::warn!("initial reduced attitude is (nearly) antipodal to the target");
    }
    let basis = plane_basis(&v0);
    let deviation = |r: &Vector| {
        let mut rem = r.clone();
        for b in &basis {
            rem -= b * b.dot(r);
        }
        rem.norm()
    };
    let make = |t: f64, r: &Vector, traveled: f64| SphereSample {
        t,
        state: UnitVector::from_vector_unchecked(r.clone()),
        geodesic_error: r[0].clamp(-1.0, 1.0).acos(),
        plane_deviation: deviation(r),
        traveled,
    };
    let steps = (t_max / dt - 1e-9).ceil() as usize;
    let mut r = v0;
    let mut samples = vec![make(0.0, &r, 0.0)];
    let mut speed = reduced_field(&r).norm();
    for j in 1..=steps {
        let k1 = reduced_field(&r);
        let k2 = reduced_field(&(&r + &k1 * (0.5 * dt)));
        let k3 = reduced_field(&(&r + &k2 * (0.5 * dt)));
        let k4 = reduced_field(&(&r + &k3 * dt));
        let next = &r + (k1 + (k2 + k3) * 2.0 + k4) * (dt / 6.0);
        r = &next / next.norm();
        let new_speed = reduced_field(&r).norm();
        let traveled = samples.last().expect("nonempty").traveled + 0.5 * (speed + new_speed) * dt;
        speed = new_speed;
        samples.push(make(j as f64 * dt, &r, traveled));
    }
    Ok(SphereTrajectory { dt, samples })
}
