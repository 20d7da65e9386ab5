//! Closed-form solutions of the closed loop.
//!
//! On SO(n) the factor H = R P solves the matrix Riccati equation
//! Ḣ = P − H², with solution
//! `H(t) = [sinh(Pt) + cosh(Pt)H₀][cosh(Pt) + sinh(Pt)H₀]⁻¹`.
//!
//! On SO(3) with P = e₁e₁ᵀ the whole attitude is available in closed form.
//! Writing R in blocks (r₁₁, r₁₂; r₂₁, R₂₂) and a = trace R₂₂,
//! b = trace R₂₂S with S = [[0, −1], [1, 0]]:
//!
//! ```text
//! r₁₁(t) = tanh(t + atanh r₁₁,₀)
//! r₂₁(t) = sech t / (1 + tanh(t) r₁₁,₀) · r₂₁,₀
//! a(t)   = (1 + r₁₁(t)) tanh φ(t),   φ(t) = atanh(a₀/(1 + r₁₁,₀)) + k ∫₀ᵗ (1 + r₁₁)
//! b(t)   = b₀ exp(∫₀ᵗ (1 − r₁₁ − k a))
//! ```
//!
//! and the remaining two columns follow from a 6×6 linear system built from
//! orthogonality, the cross product Re₁ × Re₂ = Re₃, and (a, b). The system
//! is solved through its normal equations using the Schur complement of the
//! constant lower-right block.
//!
//! The argument of the initial inverse hyperbolic tangent is a₀/(1 + r₁₁,₀),
//! which lies in [−1, 1] on SO(3) because a² + b² = (1 + r₁₁)². With that
//! normalization both trace equations hold and the initial data are
//! reproduced; the product form (1 + r₁₁,₀)·a₀ does neither.
//!
//! Other projection ranks on SO(3) reduce to the Riccati solution: rank 3
//! gives Ṙ = I − R², rank 0 gives Ṙ = k(I − R²), and rank 2 (Q = e₁e₁ᵀ after
//! alignment) determines R e₂, R e₃ through H and R e₁ by their cross product.

use crate::error::{Error, Result};
use crate::manifold::{
    atanh_extended, complex_atanh, distance_to_negative_spectrum, hyperbolic_pt, log_cosh, Mat, ProjectionPair,
    RotationMatrix,
};
use nalgebra::{Matrix2, Matrix3, Vector3};
use num_complex::Complex64;

/// Maximum tolerated imaginary part in the closed-form trace solution.
pub const REALITY_TOL: f64 = 1e-6;
/// Distance from −1 to σ(R₀) below which R₀ is treated as lying in 𝒩.
pub const NEGATIVE_SPECTRUM_TOL: f64 = 1e-9;

/// The fixed 2×2 generator S = [[0, −1], [1, 0]].
pub fn fixed_skew() -> Matrix2<f64> {
    Matrix2::new(0.0, -1.0, 1.0, 0.0)
}

/// H(t) = [sinh(Pt) + cosh(Pt)H₀][cosh(Pt) + sinh(Pt)H₀]⁻¹.
pub fn exact_h(t: f64, proj: &ProjectionPair, h0: &Mat) -> Result<Mat> {
    if h0.nrows() != proj.dim() || h0.ncols() != proj.dim() {
        return Err(Error::DimensionMismatch {
            expected: proj.dim(),
            found: h0.nrows(),
        });
    }
    let (cosh, sinh) = hyperbolic_pt(proj, t);
    let x = &sinh + &cosh * h0;
    let y = &cosh + &sinh * h0;
    // H Y = X  ⇔  Yᵀ Hᵀ = Xᵀ
    let ht = y
        .transpose()
        .lu()
        .solve(&x.transpose())
        .ok_or(Error::SingularY { t })?;
    if ht.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularY { t });
    }
    Ok(ht.transpose())
}

fn check_r11(r11_0: f64) -> Result<f64> {
    if r11_0.is_nan() || r11_0 <= -1.0 {
        return Err(Error::DomainError(format!(
            "r11(0) = {r11_0} puts R(0) in the set with -1 in its spectrum"
        )));
    }
    Ok(r11_0.min(1.0))
}

/// r₁₁(t) = tanh(t + atanh r₁₁,₀), with r₁₁ ≡ 1 when r₁₁,₀ = 1.
pub fn exact_r11(t: f64, r11_0: f64) -> Result<f64> {
    let r11_0 = check_r11(r11_0)?;
    Ok((t + atanh_extended(r11_0)).tanh())
}

/// r₂₁(t) = sech t / (1 + tanh(t) r₁₁,₀) · r₂₁,₀.
pub fn exact_r21(t: f64, r21_0: [f64; 2], r11_0: f64) -> Result<[f64; 2]> {
    let r11_0 = check_r11(r11_0)?;
    let factor = (1.0 / t.cosh()) / (1.0 + t.tanh() * r11_0);
    Ok([factor * r21_0[0], factor * r21_0[1]])
}

/// ∫₀ᵗ (1 + r₁₁(s)) ds.
fn integral_one_plus_r11(t: f64, shift: f64) -> f64 {
    if shift.is_infinite() {
        2.0 * t
    } else {
        t + log_cosh(t + shift) - log_cosh(shift)
    }
}

/// Constants of the SO(3) trace solution, computed in aligned coordinates
/// (P = e₁e₁ᵀ).
#[derive(Debug, Clone, PartialEq)]
pub struct ExactSo3Params {
    /// atanh of a₀/(1 + r₁₁,₀), principal branch
    pub phi0: Complex64,
    /// trace R₂₂(0) S
    pub b0: f64,
    pub r11_0: f64,
    pub k: f64,
}

impl ExactSo3Params {
    /// Builds the constants from an initial attitude already aligned so that
    /// P = e₁e₁ᵀ.
    pub fn new(r0: &RotationMatrix, k: f64) -> Result<Self> {
        if r0.dim() != 3 {
            return Err(Error::DimensionMismatch {
                expected: 3,
                found: r0.dim(),
            });
        }
        let m = r0.matrix();
        let r11_0 = check_r11(m[(0, 0)])?;
        let a0 = m[(1, 1)] + m[(2, 2)];
        let b0 = m[(1, 2)] - m[(2, 1)];
        let w0 = (a0 / (1.0 + r11_0)).clamp(-1.0, 1.0);
        if w0 <= -1.0 {
            return Err(Error::DomainError(
                "trace R(0) = -1: R(0) has -1 in its spectrum".into(),
            ));
        }
        let phi0 = complex_atanh(Complex64::new(w0, 0.0));
        if phi0.im.abs() > REALITY_TOL {
            return Err(Error::RealityError { residue: phi0.im.abs() });
        }
        Ok(ExactSo3Params { phi0, b0, r11_0, k })
    }

    /// f(R₀) = φ₀ + k log(1 − r₁₁,₀); −∞ when r₁₁,₀ = 1.
    pub fn f(&self) -> Complex64 {
        self.phi0 + self.k * (1.0 - self.r11_0).ln()
    }

    /// g(R₀) = b₀ cosh(atanh r₁₁,₀) cosh(φ₀).
    pub fn g(&self) -> f64 {
        self.b0 * atanh_extended(self.r11_0).cosh() * self.phi0.re.cosh()
    }

    fn phi(&self, t: f64) -> f64 {
        self.phi0.re + self.k * integral_one_plus_r11(t, atanh_extended(self.r11_0))
    }
}

/// (trace R₂₂(t), trace R₂₂(t) S).
pub fn exact_traces(t: f64, params: &ExactSo3Params) -> Result<(f64, f64)> {
    let shift = atanh_extended(params.r11_0);
    let r11 = (t + shift).tanh();
    let phi = params.phi(t);
    let a = (1.0 + r11) * phi.tanh();
    let b = if params.b0 == 0.0 || params.phi0.re.is_infinite() {
        0.0
    } else {
        let int_one_minus_r11 = if shift.is_infinite() {
            0.0
        } else {
            t - (log_cosh(t + shift) - log_cosh(shift))
        };
        let int_ka = log_cosh(phi) - log_cosh(params.phi0.re);
        params.b0 * (int_one_minus_r11 - int_ka).exp()
    };
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::RealityError { residue: f64::NAN });
    }
    Ok((a, b))
}

/// Solves for R e₂ and R e₃ given R e₁ and the two traces.
pub fn reconstruct_r(first_col: [f64; 3], trace_r22: f64, trace_r22_s: f64) -> Result<RotationMatrix> {
    let u = Vector3::from(first_col);
    #[rustfmt::skip]
    let hat_u = Matrix3::new(
        0.0, -u[2], u[1],
        u[2], 0.0, -u[0],
        -u[1], u[0], 0.0,
    );
    // unknowns (R e₂, R e₃)
    let mut a = Mat::zeros(6, 6);
    for j in 0..3 {
        a[(0, j)] = u[j];
        for i in 0..3 {
            a[(1 + i, j)] = hat_u[(i, j)];
        }
        a[(1 + j, 3 + j)] = -1.0;
    }
    a[(4, 1)] = 1.0;
    a[(4, 5)] = 1.0;
    a[(5, 2)] = -1.0;
    a[(5, 4)] = 1.0;
    let mut rhs = nalgebra::DVector::zeros(6);
    rhs[4] = trace_r22;
    rhs[5] = trace_r22_s;

    let b = a.transpose() * &a;
    let c = a.transpose() * rhs;
    let b11 = b.view((0, 0), (3, 3)).into_owned();
    let b12 = b.view((0, 3), (3, 3)).into_owned();
    let b21 = b.view((3, 0), (3, 3)).into_owned();
    // B₂₂ = I + e₂e₂ᵀ + e₃e₃ᵀ, inverse I − ½(e₂e₂ᵀ + e₃e₃ᵀ)
    let b22_inv = Mat::from_diagonal(&nalgebra::DVector::from_row_slice(&[1.0, 0.5, 0.5]));
    let c1 = c.rows(0, 3).into_owned();
    let c2 = c.rows(3, 3).into_owned();

    let schur = &b11 - &b12 * &b22_inv * &b21;
    let chol = schur.cholesky().ok_or(Error::SingularSystem)?;
    let x = chol.solve(&(&c1 - &b12 * &b22_inv * &c2));
    let y = &b22_inv * (&c2 - &b21 * &x);

    let mut r = Mat::zeros(3, 3);
    r.set_column(0, &nalgebra::DVector::from_row_slice(&first_col));
    r.set_column(1, &x);
    r.set_column(2, &y);
    crate::manifold::validate_rotation(r, 1e-8)
}

/// Residuals of the SO(3) block identities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockResiduals {
    /// ‖r₂₁r₁₂ − (r₁₁R₂₂ + S R₂₂ S)‖_F
    pub outer_product: f64,
    /// |(trace R₂₂)² + (trace R₂₂S)² − (1 + r₁₁)²|
    pub trace_circle: f64,
    /// ‖R₂₂(R₂₂ᵀ − R₂₂) − trace(R₂₂S) R₂₂S‖_F
    pub skew_part: f64,
}

impl BlockResiduals {
    pub fn max(&self) -> f64 {
        self.outer_product.max(self.trace_circle).max(self.skew_part)
    }
}

pub fn verify_block_relations(r: &RotationMatrix) -> Result<BlockResiduals> {
    if r.dim() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            found: r.dim(),
        });
    }
    let m = r.matrix();
    let r11 = m[(0, 0)];
    let r12 = nalgebra::RowVector2::new(m[(0, 1)], m[(0, 2)]);
    let r21 = nalgebra::Vector2::new(m[(1, 0)], m[(2, 0)]);
    let r22 = Matrix2::new(m[(1, 1)], m[(1, 2)], m[(2, 1)], m[(2, 2)]);
    let s = fixed_skew();
    let tr_s = (r22 * s).trace();
    Ok(BlockResiduals {
        outer_product: (r21 * r12 - (r22 * r11 + s * r22 * s)).norm(),
        trace_circle: (r22.trace().powi(2) + tr_s.powi(2) - (1.0 + r11).powi(2)).abs(),
        skew_part: (r22 * (r22.transpose() - r22) - r22 * s * tr_s).norm(),
    })
}

/// Orthogonal T with T e = e₁ (a Householder reflection, or I).
fn align_to_first_axis(e: &nalgebra::DVector<f64>) -> Mat {
    let n = e.len();
    let mut v = e.clone();
    v[0] -= 1.0;
    let vn2 = v.norm_squared();
    if vn2 < 1e-30 {
        return Mat::identity(n, n);
    }
    Mat::identity(n, n) - &v * v.transpose() * (2.0 / vn2)
}

/// Unit vector spanning a rank-one projection.
fn rank_one_axis(p: &Mat) -> nalgebra::DVector<f64> {
    let j = (0..p.ncols())
        .max_by(|&a, &b| p[(a, a)].total_cmp(&p[(b, b)]))
        .expect("nonempty");
    let col = p.column(j).into_owned();
    let n = col.norm();
    col / n
}

#[derive(Debug, Clone)]
enum Route {
    /// P = e₁e₁ᵀ in aligned coordinates.
    Geodesic {
        params: ExactSo3Params,
        r21_0: [f64; 2],
    },
    /// Q = e₁e₁ᵀ in aligned coordinates.
    ComplementAxis { proj: ProjectionPair, h0: Mat },
    /// Ṙ = scale · (I − R²).
    Riccati { proj: ProjectionPair, h0: Mat, time_scale: f64 },
}

/// The exact closed-loop solution on SO(3) for a given initial attitude.
#[derive(Debug, Clone)]
pub struct ExactSo3Solution {
    /// Maps original coordinates to aligned ones: R' = T R Tᵀ.
    alignment: Mat,
    route: Route,
    /// Set when R₀ is an exact fixed point of the closed loop.
    fixed: Option<RotationMatrix>,
}

impl ExactSo3Solution {
    pub fn new(r0: &RotationMatrix, proj: &ProjectionPair) -> Result<Self> {
        if r0.dim() != 3 || proj.dim() != 3 {
            return Err(Error::DimensionMismatch {
                expected: 3,
                found: r0.dim().max(proj.dim()),
            });
        }
        let dist = distance_to_negative_spectrum(r0)?;
        if dist <= NEGATIVE_SPECTRUM_TOL {
            return Err(Error::DomainError(format!(
                "R(0) has an eigenvalue within {dist:e} of -1"
            )));
        }
        let k = proj.k();
        let (alignment, route) = match proj.rank() {
            1 => {
                let t = align_to_first_axis(&rank_one_axis(proj.p()));
                let r0a = r0.conjugate(&t);
                let params = ExactSo3Params::new(&r0a, k)?;
                let m = r0a.matrix();
                let r21_0 = [m[(1, 0)], m[(2, 0)]];
                (t, Route::Geodesic { params, r21_0 })
            }
            2 => {
                let t = align_to_first_axis(&rank_one_axis(proj.q()));
                let r0a = r0.conjugate(&t);
                let pa = ProjectionPair::from_mask(&[false, true, true], k)?;
                let h0 = r0a.matrix() * pa.p();
                (t, Route::ComplementAxis { proj: pa, h0 })
            }
            rank => {
                let full = ProjectionPair::from_mask(&[true; 3], k)?;
                let time_scale = if rank == 3 { 1.0 } else { k };
                (
                    Mat::identity(3, 3),
                    Route::Riccati {
                        proj: full,
                        h0: r0.matrix().clone(),
                        time_scale,
                    },
                )
            }
        };
        let fixed = (crate::feedback::closed_loop_rhs_raw(r0.matrix(), proj).norm() == 0.0).then(|| r0.clone());
        Ok(ExactSo3Solution { alignment, route, fixed })
    }

    /// Constants of the trace solution when P has rank one.
    pub fn params(&self) -> Option<&ExactSo3Params> {
        match &self.route {
            Route::Geodesic { params, .. } => Some(params),
            _ => None,
        }
    }

    /// The orthogonal change of coordinates used internally.
    pub fn alignment(&self) -> &Mat {
        &self.alignment
    }

    /// R(t) in the caller's coordinates.
    pub fn at(&self, t: f64) -> Result<RotationMatrix> {
        if let Some(r) = &self.fixed {
            return Ok(r.clone());
        }
        let aligned = match &self.route {
            Route::Geodesic { params, r21_0 } => {
                let r11 = exact_r11(t, params.r11_0)?;
                let r21 = exact_r21(t, *r21_0, params.r11_0)?;
                let (a, b) = exact_traces(t, params)?;
                reconstruct_r([r11, r21[0], r21[1]], a, b)?
            }
            Route::ComplementAxis { proj, h0 } => {
                let h = exact_h(t, proj, h0)?;
                let c2 = Vector3::new(h[(0, 1)], h[(1, 1)], h[(2, 1)]);
                let c3 = Vector3::new(h[(0, 2)], h[(1, 2)], h[(2, 2)]);
                let c1 = c2.cross(&c3);
                let mut m = Mat::zeros(3, 3);
                for i in 0..3 {
                    m[(i, 0)] = c1[i];
                    m[(i, 1)] = c2[i];
                    m[(i, 2)] = c3[i];
                }
                crate::manifold::validate_rotation(m, 1e-8)?
            }
            Route::Riccati { proj, h0, time_scale } => {
                crate::manifold::validate_rotation(exact_h(t * time_scale, proj, h0)?, 1e-8)?
            }
        };
        Ok(aligned.conjugate(&self.alignment.transpose()))
    }
}
