//! Anisotropic interpolation error estimates on simplices.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`]: simplices, affine maps and the standard position of a
//!   triangle or tetrahedron together with the factorisation `A = Ã · Â`.
//! * [`shape`]: the geometric parameters `H_T`, `H_{T0}`, `H(h)`, the
//!   circumradius and angle diagnostics.
//! * [`poly`]: multivariate polynomials, simplex quadrature, smooth fields
//!   with closed-form derivatives, Sobolev seminorms and best approximation.
//! * [`interp`]: Lagrange and Crouzeix–Raviart elements, local interpolation
//!   and the anisotropic error-ratio evaluator.
//! * [`rt`]: Raviart–Thomas spaces of arbitrary order, the Piola transform
//!   and the RT interpolation operator.
//! * [`mesh`]: conforming simplicial meshes, anisotropic family generators and
//!   the `anisomesh` text format.
//! * [`experiments`]: convergence studies, the optimality sweep and the
//!   self-test suites used by the command-line tool.

pub mod error;
pub mod experiments;
pub mod geometry;
pub mod interp;
pub mod linalg;
pub mod mesh;
pub mod poly;
pub mod rt;
pub mod shape;

pub use error::{Error, Result};
