use super::{Mat, ProjectionPair};
use num_complex::Complex64;

/// Principal inverse hyperbolic tangent, ½[Log(1 + z) − Log(1 − z)].
///
/// Extended to the branch points with Atanh(1) = +∞ and Atanh(−1) = −∞
/// (returned with zero imaginary part).
pub fn complex_atanh(z: Complex64) -> Complex64 {
    if z == Complex64::new(1.0, 0.0) {
        return Complex64::new(f64::INFINITY, 0.0);
    }
    if z == Complex64::new(-1.0, 0.0) {
        return Complex64::new(f64::NEG_INFINITY, 0.0);
    }
    let one = Complex64::new(1.0, 0.0);
    ((one + z).ln() - (one - z).ln()) * 0.5
}

/// Real atanh on [−1, 1] with atanh(±1) = ±∞.
pub fn atanh_extended(x: f64) -> f64 {
    if x >= 1.0 {
        f64::INFINITY
    } else if x <= -1.0 {
        f64::NEG_INFINITY
    } else {
        x.atanh()
    }
}

/// log cosh x without overflow.
pub fn log_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// (cosh(Pt), sinh(Pt)) = (Q + cosh(t)P, sinh(t)P).
pub fn hyperbolic_pt(proj: &ProjectionPair, t: f64) -> (Mat, Mat) {
    let cosh = proj.q() + proj.p() * t.cosh();
    let sinh = proj.p() * t.sinh();
    (cosh, sinh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{expm, haar_unit_vector};
    use nalgebra::DVector;
    use proptest::prelude::*;

    #[test]
    fn atanh_special_values() {
        assert_eq!(complex_atanh(Complex64::new(0.0, 0.0)), Complex64::new(0.0, 0.0));
        assert_eq!(complex_atanh(Complex64::new(1.0, 0.0)).re, f64::INFINITY);
        assert_eq!(complex_atanh(Complex64::new(-1.0, 0.0)).re, f64::NEG_INFINITY);
        let a2 = complex_atanh(Complex64::new(2.0, 0.0));
        assert!((a2.tanh() - Complex64::new(2.0, 0.0)).norm() < 1e-12);
        assert_eq!(atanh_extended(1.0), f64::INFINITY);
        assert!(f64::INFINITY.tanh() == 1.0);
    }

    #[test]
    fn atanh_agrees_with_real_branch() {
        for x in [-0.99, -0.5, 0.0, 0.3, 0.999] {
            let z = complex_atanh(Complex64::new(x, 0.0));
            assert!((z.re - f64::atanh(x)).abs() < 1e-14);
            assert!(z.im.abs() < 1e-15);
        }
    }

    #[test]
    fn log_cosh_is_stable() {
        for x in [-800.0, -3.0, 0.0, 1e-8, 2.5, 800.0] {
            let direct = f64::cosh(x).ln();
            if direct.is_finite() {
                assert!((log_cosh(x) - direct).abs() < 1e-13);
            } else {
                assert!((log_cosh(x) - (x.abs() - std::f64::consts::LN_2)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn hyperbolic_at_zero_and_axis() {
        let p = ProjectionPair::axis(3, 0, 1.0).unwrap();
        let (c, s) = hyperbolic_pt(&p, 0.0);
        assert!((c - Mat::identity(3, 3)).norm() == 0.0);
        assert!(s.norm() == 0.0);
        let (c, s) = hyperbolic_pt(&p, 1.0);
        let want_c = Mat::from_diagonal(&DVector::from_row_slice(&[1f64.cosh(), 1.0, 1.0]));
        let want_s = Mat::from_diagonal(&DVector::from_row_slice(&[1f64.sinh(), 0.0, 0.0]));
        assert!((c - want_c).norm() < 1e-15);
        assert!((s - want_s).norm() < 1e-15);
    }

    #[test]
    fn hyperbolic_matches_matrix_exponential() {
        let v = haar_unit_vector(4, 3);
        let p = ProjectionPair::rank_one(&v, 1.0).unwrap();
        let t = 1.3;
        let (c, s) = hyperbolic_pt(&p, t);
        let e = expm(&(p.p() * t));
        let em = expm(&(p.p() * -t));
        assert!((c - (&e + &em) * 0.5).norm() < 1e-12);
        assert!((s - (&e - &em) * 0.5).norm() < 1e-12);
    }

    proptest! {
        #[test]
        fn hyperbolic_identity(t in -20.0f64..20.0, mask in proptest::collection::vec(any::<bool>(), 2..6)) {
            let p = ProjectionPair::from_mask(&mask, 1.0).unwrap();
            let (c, s) = hyperbolic_pt(&p, t);
            let n = mask.len();
            let diff = &c * &c - &s * &s - Mat::identity(n, n);
            // relative to cosh² t, the size of the individual products
            prop_assert!(diff.norm() <= 1e-12 * t.cosh().powi(2));
            // nonsingular: σ(cosh(Pt)) ⊂ {1, cosh t}
            let cond = t.cosh();
            prop_assert!(c.determinant().abs() >= 1.0 && cond.is_finite());
        }

        #[test]
        fn tanh_atanh_round_trip(re in -4.0f64..4.0, im in -4.0f64..4.0) {
            let z = Complex64::new(re, im);
            prop_assume!(z.norm() <= 4.0);
            prop_assume!((z - 1.0).norm() > 1e-6 && (z + 1.0).norm() > 1e-6);
            let back = complex_atanh(z).tanh();
            prop_assert!((back - z).norm() <= 1e-12 * z.norm().max(1.0));
        }
    }
}
