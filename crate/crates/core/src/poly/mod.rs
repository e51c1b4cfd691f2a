//! Polynomials, quadrature, smooth fields and Sobolev seminorms.

mod approx;
mod field;
mod multipoly;
mod quadrature;
mod sobolev;

pub use approx::{best_poly_approx, verfurth_bound, ApproxNorm, BestApprox};
pub use field::{
    ensure_order, AffinePullback, Combination, Components, Difference, Factor1D, SeparableTerm, Separable,
    SmoothField,
};
pub use multipoly::{poly_space_basis, MultiIndex, MultiPoly, VectorPoly};
pub use quadrature::{gauss_legendre, integrate_on, QuadratureRule};
pub use sobolev::{
    default_quadrature_degree, l2_inner, norm, seminorm, sup_seminorm_with_doubling, Exponent,
    SeminormOptions, DEFAULT_LATTICE, QUAD_DEGREE_ENV,
};
