//! The optimality example: `φ = x² + ¼y² + z²` interpolated by `P1` on the
//! tetrahedron with vertices `0, (s,0,0), (s/2,s^ε,0), (0,0,s)`.

use serde::Serialize;

use super::element::FiniteElement;
use super::interpolate::local_interpolate;
use crate::geometry::{to_standard_position, Simplex, SimplexType, StandardPosition};
use crate::poly::{seminorm, sup_seminorm_with_doubling, Difference, Exponent, MultiIndex, MultiPoly, SeminormOptions, SmoothField};
use crate::shape::param_h_t;
use crate::{Error, Result};

/// `1 / (24√10)`.
pub const OPTIMALITY_BOUND: f64 = 0.013176156917368248;
const SAMPLING_SLACK: f64 = 1e-6;
const CLOSED_FORM_TOL: f64 = 1e-8;

pub fn remark_field() -> MultiPoly {
    let mut f = MultiPoly::zero(3);
    f.add_term(MultiIndex::new(&[2, 0, 0]), 1.0);
    f.add_term(MultiIndex::new(&[0, 2, 0]), 0.25);
    f.add_term(MultiIndex::new(&[0, 0, 2]), 1.0);
    f
}

pub fn remark_tetra(s: f64, eps: f64) -> Result<Simplex> {
    if !(s > 0.0 && s < 1.0 && eps > 1.0 && eps < 2.0) {
        return Err(Error::InvalidParameter(format!("need 0 < s < 1 and 1 < ε < 2, got s={s}, ε={eps}")));
    }
    Simplex::from_points(&[[0.0, 0.0, 0.0], [s, 0.0, 0.0], [s / 2.0, s.powf(eps), 0.0], [0.0, 0.0, s]])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OptimalityReport {
    pub s: f64,
    pub eps: f64,
    /// `sup |∂_y(φ − Iφ)| / |φ|_{W^{2,∞}}`, the quantity with closed form
    /// `(s^{2−ε} + s^ε)/8`.
    pub i_t: f64,
    pub i_t_closed_form: f64,
    /// `|φ − Iφ|_{W^{1,∞}} / |φ|_{W^{2,∞}}` over all first derivatives,
    /// which equals `max(s/2, (s^{2−ε} + s^ε)/8)`.
    pub i_t_full: f64,
    pub i_t_full_closed_form: f64,
    /// Relative change of the full seminorm under lattice doubling.
    pub sampling_change: f64,
    /// `H_T` for the labelling `x₁, …, x₄` as listed.
    #[serde(rename = "H_T")]
    pub big_h_t: f64,
    #[serde(rename = "H_T_closed_form")]
    pub big_h_t_closed_form: f64,
    /// `H_T` of the edge-length-condition standard position.
    #[serde(rename = "H_T_standard")]
    pub big_h_t_standard: f64,
    pub ratio: f64,
    pub ratio_full: f64,
    pub ratio_standard: f64,
    pub bound: f64,
    pub pass: bool,
}

pub fn optimality_check(s: f64, eps: f64, opts: &SeminormOptions) -> Result<OptimalityReport> {
    let t = remark_tetra(s, eps)?;
    let phi = remark_field();
    let element = FiniteElement::lagrange(3, 1)?;
    let interp = local_interpolate(&element, &phi, &t, opts)?;
    let diff = Difference { a: &phi, b: &interp };
    let phi_semi = seminorm(&phi, &t, 2, Exponent::Infinity, opts)?;

    let dy = MultiIndex::unit(1);
    let sup_dy = t.lattice_points(opts.lattice).iter().map(|x| diff.derivative(0, dy, x.as_slice()).abs()).fold(0.0, f64::max);
    let i_t = sup_dy / phi_semi;
    let i_t_closed_form = (s.powf(2.0 - eps) + s.powf(eps)) / 8.0;
    let (full, sampling_change) = sup_seminorm_with_doubling(&diff, &t, 1, opts)?;
    let i_t_full = full / phi_semi;
    let i_t_full_closed_form = (s / 2.0).max(i_t_closed_form);

    let labeled = StandardPosition::from_labeling(&t, &[0, 1, 2, 3], SimplexType::TypeI)?;
    let big_h_t = param_h_t(&labeled);
    let big_h_t_closed_form = 6.0 * 2f64.sqrt() * s.powi(3) * ((s / 2.0).powi(2) + s.powf(2.0 * eps)).sqrt() / s.powf(2.0 + eps);
    let big_h_t_standard = param_h_t(&to_standard_position(&t)?);

    let ratio = i_t / big_h_t;
    let ratio_full = i_t_full / big_h_t;
    let ratio_standard = i_t_full / big_h_t_standard;
    let floor = OPTIMALITY_BOUND - SAMPLING_SLACK;
    let pass = (i_t - i_t_closed_form).abs() <= CLOSED_FORM_TOL
        && ratio >= floor
        && ratio_full >= floor
        && ratio_standard >= floor
        && sampling_change < 5e-3;
    Ok(OptimalityReport {
        s,
        eps,
        i_t,
        i_t_closed_form,
        i_t_full,
        i_t_full_closed_form,
        sampling_change,
        big_h_t,
        big_h_t_closed_form,
        big_h_t_standard,
        ratio,
        ratio_full,
        ratio_standard,
        bound: OPTIMALITY_BOUND,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_constant() {
        assert!((OPTIMALITY_BOUND - 1.0 / (24.0 * 10f64.sqrt())).abs() < 1e-17);
    }

    #[test]
    fn interpolant_matches_closed_form() {
        let (s, eps) = (0.25f64, 1.5f64);
        let t = remark_tetra(s, eps).unwrap();
        let e = FiniteElement::lagrange(3, 1).unwrap();
        let i = local_interpolate(&e, &remark_field(), &t, &SeminormOptions::default()).unwrap();
        let b = -0.25 * (s.powf(2.0 - eps) - s.powf(eps));
        let expected = MultiPoly::affine(0.0, &[s, b, s]);
        assert!((i.poly() - &expected).max_coefficient() < 1e-12);
    }

    #[test]
    fn quarter_three_halves() {
        let r = optimality_check(0.25, 1.5, &SeminormOptions::default()).unwrap();
        assert!(r.pass, "{r:?}");
        assert!((r.big_h_t - r.big_h_t_closed_form).abs() < 1e-12 * r.big_h_t);
        assert!((r.i_t_full - r.i_t_full_closed_form).abs() < 1e-12);
    }

    #[test]
    fn half_one_quarter_against_closed_forms() {
        let (s, eps) = (0.5f64, 1.25f64);
        let r = optimality_check(s, eps, &SeminormOptions::default()).unwrap();
        let closed_ratio = ((s.powf(2.0 - eps) + s.powf(eps)) / 8.0) / r.big_h_t_closed_form;
        assert!((r.ratio - closed_ratio).abs() < 1e-12);
        assert!(closed_ratio >= OPTIMALITY_BOUND);
    }

    #[test]
    fn out_of_range_parameters() {
        assert!(optimality_check(1.0, 1.5, &SeminormOptions::default()).is_err());
        assert!(optimality_check(0.5, 2.0, &SeminormOptions::default()).is_err());
    }
}
