//! Spherical geometry representation (SGR) of genus-zero surfaces.
//!
//! A closed genus-zero triangle mesh is embedded on the unit sphere with a
//! low-stretch parameterization ([`param`]), the sphere is unwrapped onto the
//! unit square by an equal-area map ([`equal_area`]), and surface signals are
//! resampled onto a regular grid ([`sgr`]). Meshes are rebuilt from a grid by
//! taking the convex hull of its sphere samples. [`metrics`] holds the mesh
//! regularization terms and the quality/accuracy measures used for evaluation.

pub mod equal_area;
pub mod geom;
pub mod param;
pub mod error;
pub mod mesh;
pub mod metrics;
pub mod sgr;

pub use error::{Result, SgrError};
pub use mesh::TriangleMesh;

pub type Vec3 = nalgebra::Vector3<f64>;
