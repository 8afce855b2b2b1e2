//! Numerical pseudohermitian geometry on strictly pseudoconvex CR model
//! manifolds: Tanaka-Webster connection and curvature, sub-Riemannian
//! geodesics, Jacobi fields, conjugate points, length variations and the
//! Fefferman lift.

pub mod connection;
pub mod error;
pub mod fefferman;
pub mod field;
pub mod geodesics;
pub mod jacobi;
pub mod linalg;
pub mod manifold;
pub mod models;
pub mod par;
pub mod report;
pub mod sampling;
pub mod variation;

pub use error::{GeomError, Result};
pub use linalg::{Matrix, Vector};
pub use manifold::{ChartPoint, Model, ModelManifold, Tangent};
pub use models::{heisenberg, model_from_id, scaled_heisenberg, sphere};
