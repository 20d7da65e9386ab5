//! Stability analytics for the closed loop.
//!
//! The equilibria are the symmetric rotations commuting with P. Each such R
//! has an even number i of eigenvalues at −1 and V(R) = trace(I − R) = 2i;
//! the identity is the only stable one.

mod basin;
mod geodesic;
mod linearization;

pub use basin::{monte_carlo_basin, BasinConfig, BasinReport, InitialCondition};
pub use geodesic::{geodesic_deviation, sphere_geodesic_deviation, GeodesicReport};
pub use linearization::{
    binomial, kernel_dimension, kernel_dimension_by_constraints, linearization_matrix, predicted_identity_spectrum,
    unstable_count, EquilibriumSplit, LinearizationMatrix, SpectrumSummary,
};

use crate::feedback::closed_loop_rhs_raw;
use crate::manifold::{Mat, ProjectionPair, RotationMatrix};
use serde::Serialize;

/// Default tolerance on the three equilibrium residuals.
pub const EQUILIBRIUM_TOL: f64 = 1e-8;

/// V(R) = trace(I − R).
pub fn lyapunov(r: &RotationMatrix) -> f64 {
    r.dim() as f64 - r.matrix().trace()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "i", rename_all = "snake_case")]
pub enum EquilibriumKind {
    Identity,
    /// Symmetric equilibrium with i eigenvalues at −1.
    Saddle(usize),
    NonEquilibrium,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquilibriumResiduals {
    /// ‖Rᵀ − R‖_F
    pub symmetry: f64,
    /// ‖RP − PR‖_F
    pub commutation: f64,
    /// ‖Ṙ‖_F
    pub stationarity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquilibriumClass {
    #[serde(flatten)]
    pub kind: EquilibriumKind,
    pub residuals: EquilibriumResiduals,
}

impl EquilibriumClass {
    pub fn is_equilibrium(&self) -> bool {
        self.kind != EquilibriumKind::NonEquilibrium
    }
}

pub fn classify_equilibrium(r: &RotationMatrix, proj: &ProjectionPair, tol: f64) -> EquilibriumClass {
    let m = r.matrix();
    let residuals = EquilibriumResiduals {
        symmetry: (m.transpose() - m).norm(),
        commutation: (m * proj.p() - proj.p() * m).norm(),
        stationarity: closed_loop_rhs_raw(m, proj).norm(),
    };
    let n = r.dim();
    let kind = if (m - Mat::identity(n, n)).norm() <= tol {
        EquilibriumKind::Identity
    } else if residuals.symmetry <= tol && residuals.commutation <= tol && residuals.stationarity <= tol {
        let v = lyapunov(r);
        let i = (v / 2.0).round() as usize;
        if i >= 2 && i.is_multiple_of(2) && i <= n && (v - 2.0 * i as f64).abs() <= tol {
            EquilibriumKind::Saddle(i)
        } else {
            EquilibriumKind::NonEquilibrium
        }
    } else {
        EquilibriumKind::NonEquilibrium
    };
    EquilibriumClass { kind, residuals }
}
