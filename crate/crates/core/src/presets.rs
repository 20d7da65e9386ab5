//! The worked three-dimensional example scenario.

use crate::manifold::{Mat, ProjectionPair, RotationMatrix};

/// Initial attitude of the example scenario.
pub fn example_r0() -> RotationMatrix {
    let (s2, s3, s6) = (2f64.sqrt(), 3f64.sqrt(), 6f64.sqrt());
    #[rustfmt::skip]
    let m = Mat::from_row_slice(3, 3, &[
        0.0, 1.0 / s3, -2.0 / s6,
        1.0 / s2, -1.0 / s3, -1.0 / s6,
        -1.0 / s2, -1.0 / s3, -1.0 / s6,
    ]);
    RotationMatrix::new(m).expect("example attitude is a rotation")
}

/// P = diag(0, 1, 0) with gain k.
pub fn example_projection(k: f64) -> ProjectionPair {
    ProjectionPair::from_mask(&[false, true, false], k).expect("valid projection")
}

/// V(R₀) = 3 + 1/√3 + 1/√6 for the example attitude.
pub fn example_initial_lyapunov() -> f64 {
    3.0 + 1.0 / 3f64.sqrt() + 1.0 / 6f64.sqrt()
}

/// Interval boundaries used when rendering the example's frame motion.
pub const FRAME_SNAPSHOT_TIMES: [f64; 4] = [0.0, 1.2, 2.4, 3.9];
