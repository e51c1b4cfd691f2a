//! Scalar finite elements, local interpolation and interpolation error
//! ratios.

mod element;
mod interpolate;
mod optimality;

pub use element::{Dof, ElementKind, FiniteElement};
pub use interpolate::{
    commuting_check, error_ratio, interpolation_error, local_interpolate, interpolate_with_map, ErrorRatio,
    InterpolatedFunction, VANISHING_SEMINORM,
};
pub use optimality::{optimality_check, remark_field, remark_tetra, OptimalityReport, OPTIMALITY_BOUND};
