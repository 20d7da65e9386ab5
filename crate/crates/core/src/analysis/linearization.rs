//! The linearization of the closed loop at an equilibrium.
//!
//! Near an equilibrium R write a perturbation as X = SR with S ∈ so(n). The
//! linearized field is F(X) = −XPR − RPX + kRQ(Xᵀ − X)Q, and Ṡ = F(SR)Rᵀ.
//! Its matrix is taken in the orthonormal basis (e_a e_bᵀ − e_b e_aᵀ)/√2,
//! a < b, so eigenvalue multiplicities do not depend on scaling.
//!
//! At a diagonal equilibrium with P diagonal, the basis element on (a, b) is
//! an eigenvector. It lies in the kernel exactly when R_aa = −R_bb and a, b
//! sit on the same side of P, which gives
//! `nullity = j(m − j) + (i − j)(n − m − (i − j))`
//! for rank P = m, i eigenvalues at −1 in total and j of them inside range P.

use super::{classify_equilibrium, EQUILIBRIUM_TOL};
use crate::error::{Error, Result};
use crate::manifold::{frobenius_inner, spectrum, ComplexSpectrum, Mat, ProjectionPair, RotationMatrix, SkewMatrix};
use num_complex::Complex64;
use serde::Serialize;

/// Relative threshold on singular values for numerical rank.
pub const RANK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearizationMatrix {
    n: usize,
    matrix: Mat,
}

impl LinearizationMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    /// n(n − 1)/2
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    pub fn spectrum(&self) -> Result<ComplexSpectrum> {
        spectrum(&self.matrix)
    }

    /// Dimension of the numerical null space, by singular values.
    pub fn nullity(&self) -> usize {
        numerical_nullity(&self.matrix)
    }
}

fn numerical_nullity(m: &Mat) -> usize {
    let cols = m.ncols();
    if cols == 0 {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let top = sv.max();
    if top == 0.0 {
        return cols;
    }
    let rank = sv.iter().filter(|&&s| s > RANK_TOL * top).count();
    cols - rank
}

fn require_equilibrium(r: &RotationMatrix, proj: &ProjectionPair) -> Result<()> {
    if r.dim() != proj.dim() {
        return Err(Error::DimensionMismatch {
            expected: proj.dim(),
            found: r.dim(),
        });
    }
    let class = classify_equilibrium(r, proj, EQUILIBRIUM_TOL);
    if !class.is_equilibrium() {
        let res = class.residuals;
        return Err(Error::NotAnEquilibrium {
            residual: res.symmetry.max(res.commutation).max(res.stationarity),
        });
    }
    Ok(())
}

pub fn linearization_matrix(r: &RotationMatrix, proj: &ProjectionPair) -> Result<LinearizationMatrix> {
    require_equilibrium(r, proj)?;
    let n = r.dim();
    let (p, q, k) = (proj.p(), proj.q(), proj.k());
    let rm = r.matrix();
    let rt = rm.transpose();
    let basis = SkewMatrix::basis(n);
    let d = basis.len();
    let mut out = Mat::zeros(d, d);
    for (c, s) in basis.iter().enumerate() {
        let x = s.matrix() * rm;
        let f = -(&x * p * rm) - rm * p * &x + rm * q * (x.transpose() - &x) * q * k;
        let g = f * &rt;
        for (row, e) in basis.iter().enumerate() {
            out[(row, c)] = frobenius_inner(e.matrix(), &g);
        }
    }
    Ok(LinearizationMatrix { n, matrix: out })
}

/// The spectrum at R = I as (eigenvalue, multiplicity) blocks, empty blocks
/// dropped: −2 on C(p, 2), −1 on p(n − p), −2k on C(n − p, 2).
pub fn predicted_identity_spectrum(n: usize, p: usize, k: f64) -> Result<Vec<(f64, usize)>> {
    if p > n {
        return Err(Error::InconsistentParameters(format!("rank {p} exceeds dimension {n}")));
    }
    Ok([(-2.0, binomial(p, 2)), (-1.0, p * (n - p)), (-2.0 * k, binomial(n - p, 2))]
        .into_iter()
        .filter(|&(_, mult)| mult > 0)
        .collect())
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// How the −1 eigenspace of an equilibrium splits across range P and range Q.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EquilibriumSplit {
    pub n: usize,
    /// rank P
    pub m: usize,
    /// eigenvalues at −1
    pub i: usize,
    /// eigenvalues at −1 inside range P
    pub j: usize,
}

impl EquilibriumSplit {
    /// Reads (m, i, j) off traces: trace R = n − 2i and, since R commutes with
    /// P, trace PR = m − 2j.
    pub fn of(r: &RotationMatrix, proj: &ProjectionPair) -> Result<Self> {
        require_equilibrium(r, proj)?;
        let n = r.dim();
        let m = proj.rank();
        let half_count = |x: f64, what: &str| {
            let v = x / 2.0;
            let rounded = v.round();
            if (v - rounded).abs() > 1e-6 || rounded < 0.0 {
                return Err(Error::InconsistentParameters(format!("{what} = {v} is not a count")));
            }
            Ok(rounded as usize)
        };
        let i = half_count(n as f64 - r.matrix().trace(), "i")?;
        let j = half_count(m as f64 - (proj.p() * r.matrix()).trace(), "j")?;
        let split = EquilibriumSplit { n, m, i, j };
        unstable_count(n, m, i, j)?;
        Ok(split)
    }

    pub fn nonzero_eigenvalues(&self) -> usize {
        unstable_count(self.n, self.m, self.i, self.j).expect("validated at construction")
    }
}

/// Number of eigenvalues off the imaginary axis at an equilibrium of type
/// (n, m, i, j): the sum over sign and projection blocks of the basis pairs
/// whose entries differ in sign or projection side, equivalently
/// `C(n, 2) − j(m − j) − (i − j)(n − m − (i − j))`.
pub fn unstable_count(n: usize, m: usize, i: usize, j: usize) -> Result<usize> {
    let bad = |msg: String| Err(Error::InconsistentParameters(msg));
    if m > n {
        return bad(format!("rank {m} exceeds dimension {n}"));
    }
    if i > n || i % 2 == 1 {
        return bad(format!("{i} eigenvalues at -1 is impossible on SO({n})"));
    }
    if j > i || j > m {
        return bad(format!("j = {j} exceeds min(i = {i}, m = {m})"));
    }
    if i - j > n - m {
        return bad(format!("{} eigenvalues at -1 do not fit in range Q of dimension {}", i - j, n - m));
    }
    let (a, b) = (i - j, n - m);
    let full = binomial(j, 2) + binomial(m - j, 2) + m * (n - m) + binomial(a, 2) + binomial(b - a, 2);
    let short = binomial(n, 2) - j * (m - j) - a * (b - a);
    assert_eq!(full, short, "count identity failed at n={n} m={m} i={i} j={j}");
    Ok(full)
}

/// Nullity of the linearization by singular values.
pub fn kernel_dimension(r: &RotationMatrix, proj: &ProjectionPair) -> Result<usize> {
    Ok(linearization_matrix(r, proj)?.nullity())
}

/// Dimension of {S ∈ so(n) : SR + RS = 0, PS = SP}, from the constraint
/// system alone.
pub fn kernel_dimension_by_constraints(r: &RotationMatrix, proj: &ProjectionPair) -> Result<usize> {
    require_equilibrium(r, proj)?;
    let n = r.dim();
    let rm = r.matrix();
    let p = proj.p();
    let basis = SkewMatrix::basis(n);
    let mut system = Mat::zeros(2 * n * n, basis.len());
    for (c, s) in basis.iter().enumerate() {
        let s = s.matrix();
        let anti = s * rm + rm * s;
        let comm = p * s - s * p;
        for (idx, v) in anti.iter().chain(comm.iter()).enumerate() {
            system[(idx, c)] = *v;
        }
    }
    Ok(numerical_nullity(&system))
}

/// An eigenvalue cluster.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralCluster {
    pub re: f64,
    pub im: f64,
    pub multiplicity: usize,
}

/// Eigenvalues grouped into clusters of diameter ≤ tol, sorted by real part.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumSummary(pub Vec<SpectralCluster>);

impl SpectrumSummary {
    pub fn from_values(values: &[Complex64], tol: f64) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        let mut clusters: Vec<(Complex64, usize)> = Vec::new();
        for z in sorted {
            match clusters.iter_mut().find(|(c, _)| (*c - z).norm() <= tol) {
                Some((c, mult)) => {
                    *c = (*c * *mult as f64 + z) / (*mult as f64 + 1.0);
                    *mult += 1;
                }
                None => clusters.push((z, 1)),
            }
        }
        SpectrumSummary(
            clusters
                .into_iter()
                .map(|(c, multiplicity)| SpectralCluster {
                    re: c.re,
                    im: c.im,
                    multiplicity,
                })
                .collect(),
        )
    }

    pub fn clusters(&self) -> &[SpectralCluster] {
        &self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::haar_sample;

    fn sorted_real(values: &[Complex64]) -> Vec<f64> {
        let mut v: Vec<f64> = values.iter().map(|z| z.re).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    fn expand(blocks: &[(f64, usize)]) -> Vec<f64> {
        let mut v: Vec<f64> = blocks.iter().flat_map(|&(x, m)| std::iter::repeat_n(x, m)).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// Diagonal ±1 rotations with an even number of −1 entries.
    fn diagonal_equilibria(n: usize) -> Vec<RotationMatrix> {
        (0u32..1 << n)
            .filter(|b| b.count_ones() % 2 == 0)
            .map(|b| {
                let d: Vec<f64> = (0..n).map(|a| if b >> a & 1 == 1 { -1.0 } else { 1.0 }).collect();
                RotationMatrix::from_diagonal(&d).unwrap()
            })
            .collect()
    }

    /// At diagonal R and P the pair (a, b) has eigenvalue
    /// −(r_a p_a + r_b p_b) − k q_a q_b r_a r_b (r_a + r_b).
    fn diagonal_top_eigenvalue(r: &RotationMatrix, mask: &[bool], k: f64) -> f64 {
        let n = r.dim();
        let mut top = f64::NEG_INFINITY;
        for a in 0..n {
            for b in a + 1..n {
                let (ra, rb) = (r.matrix()[(a, a)], r.matrix()[(b, b)]);
                let (pa, pb) = (mask[a] as u8 as f64, mask[b] as u8 as f64);
                let lam = -(ra * pa + rb * pb) - k * (1.0 - pa) * (1.0 - pb) * ra * rb * (ra + rb);
                top = top.max(lam);
            }
        }
        top
    }

    #[test]
    fn mixed_saddle_has_top_eigenvalue_one() {
        // One −1 in range P and one in range Q: no pair is unstable at rate 2
        // or 2k, only the mixed pairs at rate 1.
        let r = RotationMatrix::from_diagonal(&[-1.0, -1.0, 1.0]).unwrap();
        let proj = ProjectionPair::axis(3, 0, 3.0).unwrap();
        let spec = linearization_matrix(&r, &proj).unwrap().spectrum().unwrap();
        let top = spec.values().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        assert!((top - 1.0).abs() < 1e-12);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(1, 2), 0);
        assert_eq!(binomial(0, 0), 1);
        assert_eq!(binomial(12, 6), 924);
    }

    #[test]
    fn dimension_split_identity() {
        for n in 0..=12 {
            for p in 0..=n {
                assert_eq!(binomial(p, 2) + p * (n - p) + binomial(n - p, 2), binomial(n, 2));
            }
        }
    }

    #[test]
    fn predicted_spectra() {
        assert_eq!(predicted_identity_spectrum(3, 1, 2.0).unwrap(), vec![(-1.0, 2), (-4.0, 1)]);
        assert_eq!(predicted_identity_spectrum(3, 2, 5.0).unwrap(), vec![(-2.0, 1), (-1.0, 2)]);
        let mults: Vec<usize> = predicted_identity_spectrum(5, 2, 1.0).unwrap().iter().map(|b| b.1).collect();
        assert_eq!(mults, vec![1, 6, 3]);
        assert!(predicted_identity_spectrum(3, 4, 1.0).is_err());
    }

    #[test]
    fn identity_spectrum_matches_prediction() {
        for n in 3..=5 {
            for p in 0..=n {
                for k in [0.5, 1.0, 2.0] {
                    let mask: Vec<bool> = (0..n).map(|a| a < p).collect();
                    let proj = ProjectionPair::from_mask(&mask, k).unwrap();
                    let lin = linearization_matrix(&RotationMatrix::identity(n), &proj).unwrap();
                    assert_eq!(lin.dim(), n * (n - 1) / 2);
                    let got = lin.spectrum().unwrap();
                    assert!(got.values().iter().all(|z| z.im.abs() <= 1e-8));
                    let want = expand(&predicted_identity_spectrum(n, p, k).unwrap());
                    for (a, b) in sorted_real(got.values()).iter().zip(&want) {
                        assert!((a - b).abs() <= 1e-8, "n={n} p={p} k={k}");
                    }
                    assert_eq!(lin.nullity(), 0);
                }
            }
        }
    }

    #[test]
    fn three_dim_axis_example() {
        let proj = ProjectionPair::axis(3, 0, 3.0).unwrap();
        let lin = linearization_matrix(&RotationMatrix::identity(3), &proj).unwrap();
        let got = sorted_real(lin.spectrum().unwrap().values());
        assert!((got[0] + 6.0).abs() < 1e-12 && (got[1] + 1.0).abs() < 1e-12 && (got[2] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn saddle_is_exponentially_unstable() {
        let proj = ProjectionPair::axis(3, 0, 1.0).unwrap();
        let r = RotationMatrix::from_diagonal(&[1.0, -1.0, -1.0]).unwrap();
        let spec = linearization_matrix(&r, &proj).unwrap().spectrum().unwrap();
        assert!(spec.values().iter().any(|z| z.re >= 2.0 - 1e-8));
    }

    #[test]
    fn rejects_non_equilibrium() {
        let proj = ProjectionPair::axis(3, 0, 1.0).unwrap();
        let r = haar_sample(3, 7);
        assert!(matches!(linearization_matrix(&r, &proj), Err(Error::NotAnEquilibrium { .. })));
        assert!(matches!(kernel_dimension(&r, &proj), Err(Error::NotAnEquilibrium { .. })));
    }

    #[test]
    fn count_examples() {
        // R = diag(1, −1, −1), P = e₁e₁ᵀ: every direction is hyperbolic.
        assert_eq!(unstable_count(3, 1, 2, 0).unwrap(), 3);
        // R = diag(−1, 1, −1), P = e₁e₁ᵀ: S₁₂ anticommutes with R but mixes
        // range P with range Q, S₂₃ stays in range Q and spans the kernel.
        assert_eq!(unstable_count(3, 1, 2, 1).unwrap(), 2);
        assert_eq!(unstable_count(4, 2, 2, 1).unwrap(), 4);
        assert!(matches!(unstable_count(3, 1, 2, 2), Err(Error::InconsistentParameters(_))));
        assert!(matches!(unstable_count(3, 1, 3, 1), Err(Error::InconsistentParameters(_))));
        assert!(matches!(unstable_count(3, 2, 2, 0), Err(Error::InconsistentParameters(_))));
    }

    #[test]
    fn saddle_spectra_and_counts() {
        let mut checked = 0;
        for n in 3..=6 {
            for r in diagonal_equilibria(n) {
                for pmask in 0u32..1 << n {
                    if checked >= 400 {
                        break;
                    }
                    let mask: Vec<bool> = (0..n).map(|a| pmask >> a & 1 == 1).collect();
                    for k in [0.5, 1.0, 2.0] {
                        let proj = ProjectionPair::from_mask(&mask, k).unwrap();
                        let lin = linearization_matrix(&r, &proj).unwrap();
                        let spec = lin.spectrum().unwrap();
                        let mut hyperbolic = 0;
                        for z in spec.values() {
                            if z.re.abs() <= 1e-8 {
                                assert!(z.norm() <= 1e-8, "{z} on the imaginary axis");
                            } else {
                                hyperbolic += 1;
                            }
                        }
                        let nullity = lin.nullity();
                        assert_eq!(nullity, kernel_dimension_by_constraints(&r, &proj).unwrap());
                        assert_eq!(lin.dim() - nullity, hyperbolic);
                        let split = EquilibriumSplit::of(&r, &proj).unwrap();
                        assert_eq!(split.nonzero_eigenvalues(), hyperbolic);
                        let top = spec.values().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
                        assert!((top - diagonal_top_eigenvalue(&r, &mask, k)).abs() <= 1e-8);
                        if split.i > 0 {
                            assert!(top >= 1.0 - 1e-8);
                        }
                        checked += 1;
                    }
                }
            }
        }
        assert!(checked >= 50);
    }

    #[test]
    fn four_dim_cross_check() {
        let r = RotationMatrix::from_diagonal(&[-1.0, -1.0, 1.0, 1.0]).unwrap();
        let proj = ProjectionPair::from_mask(&[true, false, true, false], 1.0).unwrap();
        let a = kernel_dimension(&r, &proj).unwrap();
        let b = kernel_dimension_by_constraints(&r, &proj).unwrap();
        assert_eq!(a, b);
        // j = 1, m = 2, i = 2: nullity 1·1 + 1·1
        assert_eq!(a, 2);
        assert_eq!(EquilibriumSplit::of(&r, &proj).unwrap(), EquilibriumSplit { n: 4, m: 2, i: 2, j: 1 });
    }

    #[test]
    fn conjugated_equilibrium_keeps_counts() {
        // Q R Qᵀ with Q P Qᵀ is an equilibrium of the same type.
        let g = haar_sample(4, 3);
        let r = RotationMatrix::from_diagonal(&[-1.0, 1.0, -1.0, 1.0]).unwrap().conjugate(g.matrix());
        let p = g.matrix() * ProjectionPair::from_mask(&[true, true, false, false], 1.5).unwrap().p() * g.matrix().transpose();
        let p = (&p + p.transpose()) * 0.5;
        let proj = ProjectionPair::new(p, 1.5).unwrap();
        let split = EquilibriumSplit::of(&r, &proj).unwrap();
        assert_eq!((split.m, split.i, split.j), (2, 2, 1));
        assert_eq!(kernel_dimension(&r, &proj).unwrap(), kernel_dimension_by_constraints(&r, &proj).unwrap());
        assert_eq!(6 - kernel_dimension(&r, &proj).unwrap(), split.nonzero_eigenvalues());
    }

    #[test]
    fn clusters() {
        let vals = [Complex64::new(-1.0, 0.0), Complex64::new(-1.0 + 1e-12, 0.0), Complex64::new(2.0, 0.0)];
        let s = SpectrumSummary::from_values(&vals, 1e-8);
        assert_eq!(s.clusters().len(), 2);
        assert_eq!(s.clusters()[0].multiplicity, 2);
    }
}
