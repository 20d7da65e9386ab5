use super::{Mat, RotationMatrix, SkewMatrix};

const PADE_ORDER: usize = 6;
/// Scaling target for the 1-norm before the Padé evaluation.
const SCALED_NORM: f64 = 0.5;

fn pade_coefficients() -> [f64; PADE_ORDER + 1] {
    let q = PADE_ORDER as f64;
    let mut c = [0.0; PADE_ORDER + 1];
    c[0] = 1.0;
    for j in 1..=PADE_ORDER {
        let jf = j as f64;
        c[j] = c[j - 1] * (q - jf + 1.0) / (jf * (2.0 * q - jf + 1.0));
    }
    c
}

fn norm_one(a: &Mat) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with a diagonal [6/6] Padé
/// approximant.
///
/// For skew input the approximant p(A)/p(−A) is exactly orthogonal in exact
/// arithmetic, so the result stays on SO(n) up to rounding.
pub fn expm(a: &Mat) -> Mat {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm needs a square matrix");
    let nrm = norm_one(a);
    let squarings = if nrm > SCALED_NORM {
        (nrm / SCALED_NORM).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a * 2f64.powi(-squarings);
    let c = pade_coefficients();

    let id = Mat::identity(n, n);
    let mut power = id.clone();
    let mut even = id.clone() * c[0];
    let mut odd = Mat::zeros(n, n);
    for (j, cj) in c.iter().enumerate().skip(1) {
        power = &power * &scaled;
        if j % 2 == 0 {
            even += &power * *cj;
        } else {
            odd += &power * *cj;
        }
    }
    let num = &even + &odd;
    let den = &even - &odd;
    let mut result = den
        .lu()
        .solve(&num)
        .expect("Padé denominator is nonsingular after scaling");
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// exp(hat(ω)) for ω ∈ ℝ³.
pub fn rodrigues(omega: [f64; 3]) -> Mat {
    let theta2 = omega.iter().map(|x| x * x).sum::<f64>();
    let theta = theta2.sqrt();
    let k = SkewMatrix::hat(omega).into_matrix();
    let (a, b) = if theta < 1e-4 {
        // Taylor: sinθ/θ, (1−cosθ)/θ²
        (
            1.0 - theta2 / 6.0 + theta2 * theta2 / 120.0,
            0.5 - theta2 / 24.0 + theta2 * theta2 / 720.0,
        )
    } else {
        (theta.sin() / theta, (1.0 - theta.cos()) / theta2)
    };
    Mat::identity(3, 3) + &k * a + &k * &k * b
}

/// exp(S) for S ∈ so(n). Uses Rodrigues' formula when n = 3.
pub fn exp_skew(s: &SkewMatrix) -> RotationMatrix {
    let m = s.matrix();
    let r = if s.dim() == 3 {
        rodrigues([m[(2, 1)], m[(0, 2)], m[(1, 0)]])
    } else {
        expm(m)
    };
    RotationMatrix::from_matrix_unchecked(r)
}
