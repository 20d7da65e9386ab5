//! Dense small-matrix primitives for SO(n) and so(n).
//!
//! Every value type here is validated on construction and immutable
//! afterwards. Matrices are `nalgebra::DMatrix<f64>`; dimensions are small
//! (desk scale, n ≤ 64), so no attempt is made at blocking or sparsity.

mod eigen;
mod expm;
mod functions;
mod haar;

pub use eigen::{eigenpairs, spectrum, ComplexSpectrum, EigenPair};
pub use expm::{exp_skew, expm, rodrigues};
pub use functions::{atanh_extended, complex_atanh, hyperbolic_pt, log_cosh};
pub use haar::{haar_sample, haar_unit_vector};

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Default tolerance for accepting user-supplied rotations.
pub const DEFAULT_ORTHO_TOL: f64 = 1e-9;
/// Tolerance on skew-symmetry and projection structure.
pub const STRUCTURE_TOL: f64 = 1e-12;

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// ⟨A, B⟩ = trace(AᵀB).
pub fn frobenius_inner(a: &Mat, b: &Mat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// [A, B] = AB − BA.
pub fn commutator(a: &Mat, b: &Mat) -> Mat {
    a * b - b * a
}

fn check_square(m: &Mat) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(m.nrows())
}

/// ‖MᵀM − I‖_F.
pub fn orthogonality_residual(m: &Mat) -> f64 {
    let n = m.nrows();
    (m.transpose() * m - Mat::identity(n, n)).norm()
}

/// An element of SO(n).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct RotationMatrix(Mat);

/// Accepts `m` as a rotation iff ‖MᵀM − I‖_F ≤ tol and det(M) > 0.
pub fn validate_rotation(m: Mat, tol: f64) -> Result<RotationMatrix> {
    check_square(&m)?;
    let residual = orthogonality_residual(&m);
    if residual > tol {
        return Err(Error::NotOrthogonal { residual });
    }
    let det = m.determinant();
    if det < 0.0 {
        return Err(Error::NegativeDeterminant { det });
    }
    Ok(RotationMatrix(m))
}

impl RotationMatrix {
    pub fn new(m: Mat) -> Result<Self> {
        validate_rotation(m, DEFAULT_ORTHO_TOL)
    }

    pub fn identity(n: usize) -> Self {
        RotationMatrix(Mat::identity(n, n))
    }

    /// Diagonal rotation; entries must be ±1 with an even number of −1.
    pub fn from_diagonal(d: &[f64]) -> Result<Self> {
        Self::new(Mat::from_diagonal(&Vector::from_row_slice(d)))
    }

    pub fn from_row_slice(n: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: entries.len(),
            });
        }
        Self::new(Mat::from_row_slice(n, n, entries))
    }

    /// Wraps a matrix produced by a structure-preserving computation.
    pub(crate) fn from_matrix_unchecked(m: Mat) -> Self {
        RotationMatrix(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &Mat {
        &self.0
    }

    pub fn into_matrix(self) -> Mat {
        self.0
    }

    pub fn transpose(&self) -> RotationMatrix {
        RotationMatrix(self.0.transpose())
    }

    pub fn compose(&self, other: &RotationMatrix) -> RotationMatrix {
        RotationMatrix(&self.0 * &other.0)
    }

    pub fn orthogonality_residual(&self) -> f64 {
        orthogonality_residual(&self.0)
    }

    /// Conjugation T R Tᵀ by an orthogonal (possibly improper) T.
    pub fn conjugate(&self, t: &Mat) -> RotationMatrix {
        RotationMatrix(t * &self.0 * t.transpose())
    }
}

impl TryFrom<Mat> for RotationMatrix {
    type Error = Error;
    fn try_from(m: Mat) -> Result<Self> {
        Self::new(m)
    }
}

impl TryFrom<Vec<Vec<f64>>> for RotationMatrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::NotSquare {
                rows: n,
                cols: bad.len(),
            });
        }
        Self::new(Mat::from_fn(n, n, |i, j| rows[i][j]))
    }
}

impl From<RotationMatrix> for Vec<Vec<f64>> {
    fn from(r: RotationMatrix) -> Self {
        r.0.row_iter().map(|row| row.iter().copied().collect()).collect()
    }
}

impl From<RotationMatrix> for Mat {
    fn from(r: RotationMatrix) -> Mat {
        r.0
    }
}

/// An element of so(n).
#[derive(Debug, Clone, PartialEq)]
pub struct SkewMatrix(Mat);

impl SkewMatrix {
    pub fn new(m: Mat) -> Result<Self> {
        check_square(&m)?;
        let residual = (&m + m.transpose()).norm();
        if residual > STRUCTURE_TOL {
            return Err(Error::NotSkew { residual });
        }
        Ok(SkewMatrix(m))
    }

    /// (A − Aᵀ)/2.
    pub fn skew_part(a: &Mat) -> Self {
        SkewMatrix((a - a.transpose()) * 0.5)
    }

    pub fn zero(n: usize) -> Self {
        SkewMatrix(Mat::zeros(n, n))
    }

    /// Cross-product matrix: hat(v) w = v × w.
    pub fn hat(v: [f64; 3]) -> Self {
        #[rustfmt::skip]
        let m = Mat::from_row_slice(3, 3, &[
            0.0, -v[2], v[1],
            v[2], 0.0, -v[0],
            -v[1], v[0], 0.0,
        ]);
        SkewMatrix(m)
    }

    /// Orthonormal basis (e_a e_bᵀ − e_b e_aᵀ)/√2, a < b, lexicographic.
    pub fn basis(n: usize) -> Vec<SkewMatrix> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut out = Vec::with_capacity(n * (n - 1) / 2);
        for a in 0..n {
            for b in (a + 1)..n {
                let mut m = Mat::zeros(n, n);
                m[(a, b)] = s;
                m[(b, a)] = -s;
                out.push(SkewMatrix(m));
            }
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &Mat {
        &self.0
    }

    pub fn into_matrix(self) -> Mat {
        self.0
    }

    pub fn scale(&self, c: f64) -> SkewMatrix {
        SkewMatrix(&self.0 * c)
    }
}

/// The gain structure (P, Q = I − P, k).
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionPair {
    p: Mat,
    q: Mat,
    k: f64,
}

impl ProjectionPair {
    pub fn new(p: Mat, k: f64) -> Result<Self> {
        let n = check_square(&p)?;
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidGain(k));
        }
        let sym = (&p - p.transpose()).norm();
        if sym > STRUCTURE_TOL {
            return Err(Error::NotProjection {
                reason: format!("|Pᵀ - P|_F = {sym:e}"),
            });
        }
        let idem = (&p * &p - &p).norm();
        if idem > STRUCTURE_TOL {
            return Err(Error::NotProjection {
                reason: format!("|P² - P|_F = {idem:e}"),
            });
        }
        let q = Mat::identity(n, n) - &p;
        Ok(ProjectionPair { p, q, k })
    }

    /// Diagonal projection from a 0/1 mask.
    pub fn from_mask(mask: &[bool], k: f64) -> Result<Self> {
        let d: Vec<f64> = mask.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        Self::new(Mat::from_diagonal(&Vector::from_vec(d)), k)
    }

    /// P = e_i e_iᵀ.
    pub fn axis(n: usize, i: usize, k: f64) -> Result<Self> {
        let mut mask = vec![false; n];
        mask[i] = true;
        Self::from_mask(&mask, k)
    }

    /// P = v vᵀ for a unit vector v.
    pub fn rank_one(v: &UnitVector, k: f64) -> Result<Self> {
        let v = v.vector();
        let mut p = v * v.transpose();
        p = (&p + p.transpose()) * 0.5;
        Self::new(p, k)
    }

    pub fn dim(&self) -> usize {
        self.p.nrows()
    }

    pub fn p(&self) -> &Mat {
        &self.p
    }

    pub fn q(&self) -> &Mat {
        &self.q
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn with_gain(&self, k: f64) -> Result<Self> {
        Self::new(self.p.clone(), k)
    }

    /// rank P = trace P for a projection.
    pub fn rank(&self) -> usize {
        self.p.trace().round() as usize
    }
}

/// A point on S^{n−1}.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitVector(Vector);

impl UnitVector {
    pub fn new(v: Vector) -> Result<Self> {
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        let norm = v.norm();
        if (norm - 1.0).abs() > STRUCTURE_TOL {
            return Err(Error::NotUnit { norm });
        }
        Ok(UnitVector(v))
    }

    pub fn normalized(v: Vector) -> Result<Self> {
        let norm = v.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::NotUnit { norm });
        }
        Ok(UnitVector(v / norm))
    }

    /// e_i (zero-based).
    pub fn basis(n: usize, i: usize) -> Self {
        let mut v = Vector::zeros(n);
        v[i] = 1.0;
        UnitVector(v)
    }

    pub(crate) fn from_vector_unchecked(v: Vector) -> Self {
        UnitVector(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn vector(&self) -> &Vector {
        &self.0
    }

    pub fn dot(&self, other: &UnitVector) -> f64 {
        self.0.dot(&other.0)
    }
}

/// Whether −1 lies within `tol` of σ(R).
pub fn in_negative_spectrum_set(r: &RotationMatrix, tol: f64) -> Result<bool> {
    Ok(distance_to_negative_spectrum(r)? <= tol)
}

/// min over σ(R) of |λ + 1|.
pub fn distance_to_negative_spectrum(r: &RotationMatrix) -> Result<f64> {
    let sp = spectrum(r.matrix())?;
    Ok(sp
        .values()
        .iter()
        .map(|l| (l + 1.0).norm())
        .fold(f64::INFINITY, f64::min))
}

/// Checks one instance of the implication −1 ∉ σ(R) ⇒ −1 ∉ σ(PRP).
pub fn check_prp_lemma(r: &RotationMatrix, proj: &ProjectionPair, tol: f64) -> Result<bool> {
    if r.dim() != proj.dim() {
        return Err(Error::DimensionMismatch {
            expected: r.dim(),
            found: proj.dim(),
        });
    }
    if in_negative_spectrum_set(r, tol)? {
        return Ok(true);
    }
    let prp = proj.p() * r.matrix() * proj.p();
    let sp = spectrum(&prp)?;
    Ok(sp.values().iter().all(|l| (l + 1.0).norm() > tol))
}
