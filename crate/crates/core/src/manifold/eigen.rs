//! Eigenvalues of small dense real matrices: balancing, Householder
//! reduction to Hessenberg form, then Francis double-shift QR.

use super::Mat;
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Relative size below which a subdiagonal entry is deflated.
const DEFLATION_TOL: f64 = 1e-12;
/// Total QR sweeps allowed per unit of dimension.
const SWEEPS_PER_DIM: usize = 100;

/// Eigenvalues with multiplicity; the count always equals the dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrum(Vec<Complex64>);

impl ComplexSpectrum {
    pub fn values(&self) -> &[Complex64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn product(&self) -> Complex64 {
        self.0.iter().fold(Complex64::new(1.0, 0.0), |acc, l| acc * l)
    }

    /// Values sorted by real part, then imaginary part.
    pub fn sorted(&self) -> Vec<Complex64> {
        let mut v = self.0.clone();
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }
}

#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: Complex64,
    pub vector: nalgebra::DVector<Complex64>,
}

/// Eigenvalues of a square real matrix.
pub fn spectrum(m: &Mat) -> Result<ComplexSpectrum> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::NotSquare {
            rows: n,
            cols: m.ncols(),
        });
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    if n == 0 {
        return Ok(ComplexSpectrum(Vec::new()));
    }
    let mut a = m.clone();
    balance(&mut a);
    hessenberg(&mut a);
    let vals = hessenberg_qr(&mut a)?;
    Ok(ComplexSpectrum(vals))
}

/// Eigenvalues together with unit eigenvectors from inverse iteration.
pub fn eigenpairs(m: &Mat) -> Result<Vec<EigenPair>> {
    let sp = spectrum(m)?;
    let n = m.nrows();
    let mc: DMatrix<Complex64> = m.map(|x| Complex64::new(x, 0.0));
    let scale = m.norm().max(1.0);
    let mut out = Vec::with_capacity(n);
    for (idx, &lambda) in sp.values().iter().enumerate() {
        // a small shift keeps the factorization nonsingular
        let shifted = lambda + Complex64::new(scale * 1e-10, scale * 1e-11);
        let a = &mc - DMatrix::<Complex64>::identity(n, n) * shifted;
        let lu = a.lu();
        let mut x = nalgebra::DVector::<Complex64>::from_fn(n, |i, _| {
            Complex64::new(1.0 + ((i + idx) % 7) as f64 * 0.137, 0.3 - 0.05 * i as f64)
        });
        for _ in 0..3 {
            let Some(y) = lu.solve(&x) else { break };
            let nrm = y.norm();
            if !(nrm.is_finite() && nrm > 0.0) {
                break;
            }
            x = y.unscale(nrm);
        }
        out.push(EigenPair {
            value: lambda,
            vector: x,
        });
    }
    Ok(out)
}

/// Diagonal similarity scaling by powers of two to equalize row and column
/// norms.
fn balance(a: &mut Mat) {
    const RADIX: f64 = 2.0;
    let n = a.nrows();
    let sqrdx = RADIX * RADIX;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c != 0.0 && r != 0.0 {
                let mut g = r / RADIX;
                let mut f = 1.0;
                let s = c + r;
                while c < g {
                    f *= RADIX;
                    c *= sqrdx;
                }
                g = r * RADIX;
                while c > g {
                    f /= RADIX;
                    c /= sqrdx;
                }
                if (c + r) / f < 0.95 * s {
                    done = false;
                    let g = 1.0 / f;
                    for j in 0..n {
                        a[(i, j)] *= g;
                    }
                    for j in 0..n {
                        a[(j, i)] *= f;
                    }
                }
            }
        }
    }
}

/// In-place Householder reduction to upper Hessenberg form.
fn hessenberg(a: &mut Mat) {
    let n = a.nrows();
    if n < 3 {
        return;
    }
    for k in 0..n - 2 {
        let alpha_norm = (k + 1..n).map(|i| a[(i, k)].powi(2)).sum::<f64>().sqrt();
        if alpha_norm == 0.0 {
            continue;
        }
        let alpha = if a[(k + 1, k)] > 0.0 {
            -alpha_norm
        } else {
            alpha_norm
        };
        let mut v: Vec<f64> = (k + 1..n).map(|i| a[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        // A ← H A, H = I − 2vvᵀ/|v|²
        for j in 0..n {
            let dot: f64 = v.iter().enumerate().map(|(t, vt)| vt * a[(k + 1 + t, j)]).sum();
            let f = 2.0 * dot / vnorm2;
            for (t, vt) in v.iter().enumerate() {
                a[(k + 1 + t, j)] -= f * vt;
            }
        }
        // A ← A H
        for i in 0..n {
            let dot: f64 = v.iter().enumerate().map(|(t, vt)| vt * a[(i, k + 1 + t)]).sum();
            let f = 2.0 * dot / vnorm2;
            for (t, vt) in v.iter().enumerate() {
                a[(i, k + 1 + t)] -= f * vt;
            }
        }
        for i in k + 2..n {
            a[(i, k)] = 0.0;
        }
    }
}

fn sign(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix (destroys `a`).
fn hessenberg_qr(a: &mut Mat) -> Result<Vec<Complex64>> {
    let n = a.nrows() as isize;
    let cap = SWEEPS_PER_DIM * a.nrows();
    let mut wr = vec![0.0; n as usize];
    let mut wi = vec![0.0; n as usize];

    macro_rules! at {
        ($i:expr, $j:expr) => {
            a[(($i) as usize, ($j) as usize)]
        };
    }

    let mut anorm = 0.0;
    for i in 0..n {
        for j in (i - 1).max(0)..n {
            anorm += at!(i, j).abs();
        }
    }

    let mut nn = n - 1;
    let mut t = 0.0;
    let mut sweeps = 0usize;
    let (mut p, mut q, mut r) = (0.0, 0.0, 0.0);
    while nn >= 0 {
        let mut its = 0;
        loop {
            let mut l = nn;
            while l >= 1 {
                let mut s = at!(l - 1, l - 1).abs() + at!(l, l).abs();
                if s == 0.0 {
                    s = anorm;
                }
                if at!(l, l - 1).abs() <= DEFLATION_TOL * s {
                    at!(l, l - 1) = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = at!(nn, nn);
            if l == nn {
                wr[nn as usize] = x + t;
                wi[nn as usize] = 0.0;
                nn -= 1;
                break;
            }
            let mut y = at!(nn - 1, nn - 1);
            let mut w = at!(nn, nn - 1) * at!(nn - 1, nn);
            if l == nn - 1 {
                p = 0.5 * (y - x);
                q = p * p + w;
                let mut z = q.abs().sqrt();
                x += t;
                let (i1, i0) = ((nn - 1) as usize, nn as usize);
                if q >= 0.0 {
                    z = p + sign(z, p);
                    wr[i1] = x + z;
                    wr[i0] = x + z;
                    if z != 0.0 {
                        wr[i0] = x - w / z;
                    }
                    wi[i1] = 0.0;
                    wi[i0] = 0.0;
                } else {
                    wr[i1] = x + p;
                    wr[i0] = x + p;
                    wi[i1] = -z;
                    wi[i0] = z;
                }
                nn -= 2;
                break;
            }
            if sweeps >= cap {
                return Err(Error::NoConvergence { iterations: sweeps });
            }
            if its == 10 || its == 20 {
                // exceptional shift
                t += x;
                for i in 0..=nn {
                    at!(i, i) -= x;
                }
                let s = at!(nn, nn - 1).abs() + at!(nn - 1, nn - 2).abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            sweeps += 1;
            let mut m = nn - 2;
            let mut z;
            while m >= l {
                z = at!(m, m);
                r = x - z;
                let s = y - z;
                p = (r * s - w) / at!(m + 1, m) + at!(m, m + 1);
                q = at!(m + 1, m + 1) - z - r - s;
                r = at!(m + 2, m + 1);
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = at!(m, m - 1).abs() * (q.abs() + r.abs());
                let v = p.abs() * (at!(m - 1, m - 1).abs() + z.abs() + at!(m + 1, m + 1).abs());
                if u <= f64::EPSILON * v {
                    break;
                }
                m -= 1;
            }
            for i in (m + 2)..=nn {
                at!(i, i - 2) = 0.0;
                if i != m + 2 {
                    at!(i, i - 3) = 0.0;
                }
            }
            let mut k = m;
            while k < nn {
                if k != m {
                    p = at!(k, k - 1);
                    q = at!(k + 1, k - 1);
                    r = 0.0;
                    if k != nn - 1 {
                        r = at!(k + 2, k - 1);
                    }
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = sign((p * p + q * q + r * r).sqrt(), p);
                if s != 0.0 {
                    if k == m {
                        if l != m {
                            at!(k, k - 1) = -at!(k, k - 1);
                        }
                    } else {
                        at!(k, k - 1) = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nn {
                        p = at!(k, j) + q * at!(k + 1, j);
                        if k != nn - 1 {
                            p += r * at!(k + 2, j);
                            at!(k + 2, j) -= p * z;
                        }
                        at!(k + 1, j) -= p * y;
                        at!(k, j) -= p * x;
                    }
                    let mmin = if nn < k + 3 { nn } else { k + 3 };
                    for i in l..=mmin {
                        p = x * at!(i, k) + y * at!(i, k + 1);
                        if k != nn - 1 {
                            p += z * at!(i, k + 2);
                            at!(i, k + 2) -= p * r;
                        }
                        at!(i, k + 1) -= p * q;
                        at!(i, k) -= p;
                    }
                }
                k += 1;
            }
        }
    }
    Ok(wr
        .into_iter()
        .zip(wi)
        .map(|(re, im)| Complex64::new(re, im))
        .collect())
}
