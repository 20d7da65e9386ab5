//! Geodesic attitude feedback on SO(n).
//!
//! The closed loop `Ṙ = U(R) R` drives the full attitude to the identity
//! while the reduced attitude `R e` travels along a great circle. This crate
//! provides the feedback law, structure-preserving integrators, closed-form
//! solutions on SO(3), and stability analytics.

pub mod analysis;
pub mod error;
pub mod exact;
pub mod feedback;
pub mod integrator;
pub mod manifold;
pub mod presets;

pub use error::{Error, Result};
pub use feedback::ClosedLoopConfig;
pub use manifold::{ProjectionPair, RotationMatrix, SkewMatrix, UnitVector};
