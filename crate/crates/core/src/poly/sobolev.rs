//! Sobolev seminorms `|f|_{W^{m,p}(T)}` for `p ∈ {2, ∞}`.
//!
//! The seminorm sums over multi-indices, so a mixed derivative such as
//! `∂x∂y` is counted once:
//! `|f|_{W^{m,2}}² = Σ_{|β| = m} ‖∂^β f‖²_{L²}`,
//! `|f|_{W^{m,∞}} = max_{|β| = m} sup |∂^β f|`.
//! For vector fields the component contributions are summed in squares
//! (`p = 2`) or maximised (`p = ∞`).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::field::{ensure_order, SmoothField};
use super::multipoly::MultiIndex;
use super::quadrature::{integrate_on, QuadratureRule};
use crate::geometry::Simplex;
use crate::Result;

pub const DEFAULT_LATTICE: usize = 64;
pub const QUAD_DEGREE_ENV: &str = "ANISOFEM_QUAD_DEGREE";
const FALLBACK_QUAD_DEGREE: u32 = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Exponent {
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "inf")]
    Infinity,
}

impl std::fmt::Display for Exponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Exponent::Two => write!(f, "2"),
            Exponent::Infinity => write!(f, "inf"),
        }
    }
}

impl std::str::FromStr for Exponent {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "2" => Ok(Exponent::Two),
            "inf" | "infinity" => Ok(Exponent::Infinity),
            other => Err(crate::Error::InvalidParameter(format!("p must be 2 or inf, got {other}"))),
        }
    }
}

/// Quadrature degree for non-polynomial integrands, overridable through the
/// `ANISOFEM_QUAD_DEGREE` environment variable.
pub fn default_quadrature_degree() -> u32 {
    std::env::var(QUAD_DEGREE_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(FALLBACK_QUAD_DEGREE)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeminormOptions {
    /// Quadrature degree used when the integrand is not a polynomial.
    pub quad_degree: u32,
    /// Subdivisions per edge of the sampling lattice for `p = ∞`.
    pub lattice: usize,
}

impl Default for SeminormOptions {
    fn default() -> Self {
        SeminormOptions { quad_degree: default_quadrature_degree(), lattice: DEFAULT_LATTICE }
    }
}

impl SeminormOptions {
    fn degree_for_square(&self, field: &dyn SmoothField, order: u32) -> u32 {
        match field.polynomial_degree() {
            Some(q) => 2 * q.saturating_sub(order),
            None => self.quad_degree,
        }
    }
}

pub fn seminorm(field: &dyn SmoothField, simplex: &Simplex, m: u32, p: Exponent, opts: &SeminormOptions) -> Result<f64> {
    ensure_order(field, m)?;
    let betas = MultiIndex::all_of_order(simplex.dim(), m);
    Ok(match p {
        Exponent::Two => {
            let rule = QuadratureRule::for_degree(simplex.dim(), opts.degree_for_square(field, m));
            let sq = integrate_on(&rule, simplex.vertices(), simplex.measure(), |x| {
                let mut s = 0.0;
                for c in 0..field.components() {
                    for b in &betas {
                        s += field.derivative(c, *b, x).powi(2);
                    }
                }
                s
            });
            sq.max(0.0).sqrt()
        }
        Exponent::Infinity => lattice_sup(field, simplex, &betas, opts.lattice),
    })
}

/// Full norm: `(Σ_{j ≤ m} |f|²_{W^{j,2}})^{1/2}` or `max_{j ≤ m} |f|_{W^{j,∞}}`.
pub fn norm(field: &dyn SmoothField, simplex: &Simplex, m: u32, p: Exponent, opts: &SeminormOptions) -> Result<f64> {
    let parts = (0..=m).map(|j| seminorm(field, simplex, j, p, opts)).collect::<Result<Vec<_>>>()?;
    Ok(match p {
        Exponent::Two => parts.iter().map(|v| v * v).sum::<f64>().sqrt(),
        Exponent::Infinity => parts.into_iter().fold(0.0, f64::max),
    })
}

/// `W^{m,∞}` seminorm sampled on lattices with `n` and `2n` subdivisions.
/// Returns the finer value and the relative change between the two.
pub fn sup_seminorm_with_doubling(
    field: &dyn SmoothField,
    simplex: &Simplex,
    m: u32,
    opts: &SeminormOptions,
) -> Result<(f64, f64)> {
    ensure_order(field, m)?;
    let betas = MultiIndex::all_of_order(simplex.dim(), m);
    let coarse = lattice_sup(field, simplex, &betas, opts.lattice);
    let fine = lattice_sup(field, simplex, &betas, 2 * opts.lattice);
    let change = if fine > 0.0 { (fine - coarse).abs() / fine } else { 0.0 };
    Ok((fine, change))
}

/// Derivatives that are affine take their extreme values at vertices, so such
/// fields are sampled at the vertices only.
fn lattice_sup(field: &dyn SmoothField, simplex: &Simplex, betas: &[MultiIndex], n: usize) -> f64 {
    let m = betas.first().map_or(0, MultiIndex::order);
    let affine = field.polynomial_degree().is_some_and(|q| q <= m + 1);
    simplex
        .lattice_points(if affine { 1 } else { n })
        .par_iter()
        .map(|x| {
            let mut sup: f64 = 0.0;
            for c in 0..field.components() {
                for b in betas {
                    sup = sup.max(field.derivative(c, *b, x.as_slice()).abs());
                }
            }
            sup
        })
        .reduce(|| 0.0, f64::max)
}

/// `Σ_c ∫_T f_c g_c`.
pub fn l2_inner(f: &dyn SmoothField, g: &dyn SmoothField, simplex: &Simplex, quad_degree: u32) -> f64 {
    assert_eq!(f.components(), g.components());
    let rule = QuadratureRule::for_degree(simplex.dim(), quad_degree);
    integrate_on(&rule, simplex.vertices(), simplex.measure(), |x| {
        (0..f.components()).map(|c| f.value(c, x) * g.value(c, x)).sum()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{MultiPoly, Separable, Factor1D};

    fn unit_triangle() -> Simplex {
        Simplex::from_points(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap()
    }

    #[test]
    fn second_seminorm_of_paraboloid() {
        // partials 2, 0, 2 on |T| = 1/2 -> sqrt(8 * 1/2) = 2
        let mut f = MultiPoly::zero(2);
        f.add_term(MultiIndex::new(&[2, 0]), 1.0);
        f.add_term(MultiIndex::new(&[0, 2]), 1.0);
        let v = seminorm(&f, &unit_triangle(), 2, Exponent::Two, &SeminormOptions::default()).unwrap();
        assert!((v - 2.0).abs() < 1e-14);
    }

    #[test]
    fn affine_field_has_zero_second_seminorm() {
        let f = MultiPoly::affine(1.0, &[2.0, -3.0]);
        for p in [Exponent::Two, Exponent::Infinity] {
            let v = seminorm(&f, &unit_triangle(), 2, p, &SeminormOptions::default()).unwrap();
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn sup_seminorm_of_remark_field() {
        let mut f = MultiPoly::zero(3);
        f.add_term(MultiIndex::new(&[2, 0, 0]), 1.0);
        f.add_term(MultiIndex::new(&[0, 2, 0]), 0.25);
        f.add_term(MultiIndex::new(&[0, 0, 2]), 1.0);
        let t = Simplex::reference(3);
        let v = seminorm(&f, &t, 2, Exponent::Infinity, &SeminormOptions::default()).unwrap();
        assert!((v - 2.0).abs() < 1e-15);
    }

    #[test]
    fn order_beyond_field_is_rejected() {
        struct Rough;
        impl SmoothField for Rough {
            fn dim(&self) -> usize {
                2
            }
            fn max_order(&self) -> Option<u32> {
                Some(1)
            }
            fn derivative(&self, _: usize, _: MultiIndex, _: &[f64]) -> f64 {
                0.0
            }
        }
        assert!(seminorm(&Rough, &unit_triangle(), 2, Exponent::Two, &SeminormOptions::default()).is_err());
    }

    #[test]
    fn doubling_changes_smooth_sup_little() {
        let f = Separable::product(vec![Factor1D::sin(3.0), Factor1D::cos(2.0)]);
        let (v, change) = sup_seminorm_with_doubling(&f, &unit_triangle(), 1, &SeminormOptions::default()).unwrap();
        assert!(v > 0.0 && change < 5e-3);
    }
}
