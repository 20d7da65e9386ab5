use super::{Mat, RotationMatrix, UnitVector, Vector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Haar-distributed rotation, deterministic in `seed`.
///
/// QR of a standard Gaussian matrix, with the columns of Q rescaled by the
/// signs of diag(R); if the result is improper the last column is negated.
pub fn haar_sample(n: usize, seed: u64) -> RotationMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = Mat::from_fn(n, n, |_, _| StandardNormal.sample(&mut rng));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        q.column_mut(n - 1).neg_mut();
    }
    RotationMatrix::from_matrix_unchecked(q)
}

/// Uniformly distributed point on S^{n−1}, deterministic in `seed`.
pub fn haar_unit_vector(n: usize, seed: u64) -> UnitVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let v = Vector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
        let norm = v.norm();
        if norm > 1e-8 {
            return UnitVector::from_vector_unchecked(v / norm);
        }
    }
}
