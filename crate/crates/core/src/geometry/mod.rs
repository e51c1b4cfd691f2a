//! Simplices, affine maps and the standard position of a simplex.

mod affine;
mod sampling;
mod simplex;
mod standard;

pub use affine::AffineMap;
pub use sampling::{random_orthogonal, random_simplex};
pub use simplex::{barycentric_lattice, embedded_measure, Edge, Facet, Point, Simplex, DEGENERACY_TOL};
pub use standard::{decompose_affine, to_standard_position, Decomposition, RigidMotion, Shear, SimplexType, StandardPosition};
