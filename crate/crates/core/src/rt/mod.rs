//! Raviart–Thomas spaces `RT^k = 𝒫^k(T)^d + x 𝒫^k(T)`, their degrees of
//! freedom, the Piola transform and the RT interpolation operator.

mod dofs;
mod interpolate;
mod piola;
mod space;
mod stability;

pub use dofs::{rt_dofs, RTDofSet, RtDof};
pub use interpolate::{physical_basis, rt_commuting_check, rt_error_ratio, rt_interpolate, RtErrorRatio, RtInterpolant, RtInterpolator};
pub use piola::{piola_identities, PiolaMap};
pub use space::{build_rt_space, rt_dimension, vector_l2_inner, RTSpace};
pub use stability::{
    component_stability, component_stability_doubling, random_vector_field, stability_ratios, StabilityEstimate, StabilityReport,
};
