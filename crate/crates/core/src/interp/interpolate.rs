use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use super::element::FiniteElement;
use crate::geometry::{to_standard_position, AffineMap, Simplex};
use crate::poly::{seminorm, AffinePullback, Difference, Exponent, MultiIndex, MultiPoly, SeminormOptions, SmoothField};
use crate::shape::param_h_t;
use crate::{Error, Result};

/// Seminorms below this are treated as zero when forming error ratios.
pub const VANISHING_SEMINORM: f64 = 1e-14;

/// `I_T v = Σ χ_i(v) θ_i` on a physical simplex.
///
/// As a field it is evaluated as `p̂ ∘ Φ⁻¹`: expanding `p̂` into physical
/// monomials cancels badly on thin simplices away from the origin.
#[derive(Clone)]
pub struct InterpolatedFunction {
    coefficients: Vec<f64>,
    map: AffineMap,
    reference_poly: MultiPoly,
    poly: MultiPoly,
    field: Arc<AffinePullback>,
}

impl fmt::Debug for InterpolatedFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InterpolatedFunction")
            .field("coefficients", &self.coefficients)
            .field("map", &self.map)
            .field("reference_poly", &self.reference_poly)
            .finish()
    }
}

impl InterpolatedFunction {
    /// `χ_i(v ∘ Φ)`.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// The map `Φ` from the element's reference simplex.
    pub fn map(&self) -> &AffineMap {
        &self.map
    }

    /// `Σ χ_i(v ∘ Φ) θ̂_i` in reference coordinates.
    pub fn reference_poly(&self) -> &MultiPoly {
        &self.reference_poly
    }

    /// The interpolant expanded in physical monomials.
    pub fn poly(&self) -> &MultiPoly {
        &self.poly
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.field.value(0, x)
    }
}

impl SmoothField for InterpolatedFunction {
    fn dim(&self) -> usize {
        self.field.dim()
    }

    fn polynomial_degree(&self) -> Option<u32> {
        self.field.polynomial_degree()
    }

    fn derivative(&self, component: usize, beta: MultiIndex, x: &[f64]) -> f64 {
        self.field.derivative(component, beta, x)
    }
}

fn dof_quad_degree(element: &FiniteElement, f: &dyn SmoothField, opts: &SeminormOptions) -> u32 {
    match f.polynomial_degree() {
        Some(q) => q.max(element.degree()),
        None => opts.quad_degree,
    }
}

/// Interpolate through an explicit map `Φ: T̂ → T`.
pub fn interpolate_with_map(
    element: &FiniteElement,
    f: &dyn SmoothField,
    map: &AffineMap,
    opts: &SeminormOptions,
) -> Result<InterpolatedFunction> {
    if f.components() != 1 || f.dim() != element.dim() {
        return Err(Error::InvalidParameter("scalar element needs a scalar field of matching dimension".into()));
    }
    let qdeg = dof_quad_degree(element, f, opts);
    let coefficients: Vec<f64> = element.dofs().iter().map(|d| d.evaluate_pullback(f, map, qdeg)).collect();
    if let Some(bad) = coefficients.iter().find(|c| !c.is_finite()) {
        return Err(Error::InvalidParameter(format!("degree of freedom evaluated to {bad}")));
    }
    let reference_poly = coefficients
        .iter()
        .zip(element.basis())
        .fold(MultiPoly::zero(element.dim()), |acc, (c, theta)| &acc + &theta.scaled(*c));
    let inv = map.inverse();
    let poly = reference_poly.compose_affine(inv.matrix(), inv.offset());
    let field = Arc::new(AffinePullback::compose(Arc::new(reference_poly.clone()), inv.matrix().clone(), inv.offset().clone()));
    Ok(InterpolatedFunction { coefficients, map: map.clone(), reference_poly, poly, field })
}

/// `I_T f` with `Φ` the vertex-order map from the element's reference simplex.
pub fn local_interpolate(element: &FiniteElement, f: &dyn SmoothField, t: &Simplex, opts: &SeminormOptions) -> Result<InterpolatedFunction> {
    let map = AffineMap::between(element.reference(), t)?;
    interpolate_with_map(element, f, &map, opts)
}

/// `max |I_T(v)(Φ(x̂)) − I_{T̂}(v ∘ Φ)(x̂)|` over random reference points, with `Φ`
/// the standard-position chain `motion⁻¹ ∘ Ã ∘ Â` and `I_{T̂}` built on the
/// matching reference simplex.
pub fn commuting_check<R: Rng + ?Sized>(
    element: &FiniteElement,
    f: &dyn SmoothField,
    t: &Simplex,
    points: usize,
    rng: &mut R,
    opts: &SeminormOptions,
) -> Result<f64> {
    let physical = local_interpolate(element, f, t, opts)?;
    let sp = to_standard_position(t)?;
    let reference = FiniteElement::on(element.kind(), sp.reference_simplex())?;
    let phi = sp.reference_map();
    let pulled = interpolate_with_map(&reference, f, &phi, opts)?;
    let rs = sp.reference_simplex();
    let scale = physical.poly().max_coefficient().max(1.0);
    let mut worst: f64 = 0.0;
    for _ in 0..points {
        let mut lambda: Vec<f64> = (0..=t.dim()).map(|_| -rng.gen::<f64>().max(1e-300).ln()).collect();
        let sum: f64 = lambda.iter().sum();
        lambda.iter_mut().for_each(|l| *l /= sum);
        let xh = rs.barycentric_point(&lambda);
        let lhs = physical.eval(phi.apply(xh.as_slice()).as_slice());
        let rhs = pulled.reference_poly().eval(xh.as_slice());
        worst = worst.max((lhs - rhs).abs() / scale);
    }
    Ok(worst)
}

/// `|f − I_T f|_{W^{m,p}(T)}`.
pub fn interpolation_error(
    element: &FiniteElement,
    f: &dyn SmoothField,
    t: &Simplex,
    m: u32,
    p: Exponent,
    opts: &SeminormOptions,
) -> Result<f64> {
    let interp = local_interpolate(element, f, t, opts)?;
    seminorm(&Difference { a: f, b: &interp }, t, m, p, opts)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ErrorRatio {
    pub error: f64,
    pub bound_factor: f64,
    pub ratio: f64,
    pub h_t: f64,
    #[serde(rename = "H_T")]
    pub big_h_t: f64,
    /// `|f|_{W^{ℓ+1,p}(T)}`.
    pub seminorm: f64,
}

/// Error and bound factor `(H_T/h_T)^m h_T^{ℓ+1−m} |f|_{W^{ℓ+1,p}(T)}`.
///
/// When `|f|_{W^{ℓ+1,p}}` vanishes the ratio is 0 if the error vanishes too
/// and an error otherwise.
pub fn error_ratio(
    element: &FiniteElement,
    f: &dyn SmoothField,
    t: &Simplex,
    m: u32,
    p: Exponent,
    l: u32,
    opts: &SeminormOptions,
) -> Result<ErrorRatio> {
    let k = element.degree();
    if m > l + 1 || l > k {
        return Err(Error::InvalidParameter(format!("need 0 ≤ m ≤ ℓ+1 ≤ k+1, got m={m}, ℓ={l}, k={k}")));
    }
    let sp = to_standard_position(t)?;
    let h_t = t.diameter();
    let big_h_t = param_h_t(&sp);
    let error = interpolation_error(element, f, t, m, p, opts)?;
    let semi = seminorm(f, t, l + 1, p, opts)?;
    let bound_factor = (big_h_t / h_t).powi(m as i32) * h_t.powi((l + 1 - m) as i32) * semi;
    let ratio = if semi < VANISHING_SEMINORM {
        if error < VANISHING_SEMINORM {
            0.0
        } else {
            return Err(Error::VanishingSeminorm(semi));
        }
    } else {
        error / bound_factor
    };
    Ok(ErrorRatio { error, bound_factor, ratio, h_t, big_h_t, seminorm: semi })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interp::ElementKind;
    use crate::poly::{poly_space_basis, Factor1D, MultiIndex, Separable};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tet() -> Simplex {
        Simplex::from_points(&[[0.1, 0.0, 0.2], [1.2, 0.3, 0.0], [0.4, 0.9, 0.1], [0.3, 0.2, 0.8]]).unwrap()
    }

    #[test]
    fn reproduces_polynomials_of_element_degree() {
        let opts = SeminormOptions::default();
        let t = tet();
        for kind in [ElementKind::Lagrange(1), ElementKind::Lagrange(2), ElementKind::CrouzeixRaviart] {
            let e = FiniteElement::new(kind, 3).unwrap();
            for q in poly_space_basis(3, e.degree()) {
                let q = &q + &MultiPoly::affine(0.5, &[1.0, -1.0, 2.0]);
                let i = local_interpolate(&e, &q, &t, &opts).unwrap();
                assert!((&q - i.poly()).max_coefficient() < 1e-10, "{kind} {q}");
            }
        }
    }

    #[test]
    fn pullback_dofs_match_composed_field() {
        use crate::poly::AffinePullback;
        use std::sync::Arc;
        let t = tet();
        let map = t.reference_map();
        let f: Arc<dyn SmoothField> = Arc::new(Separable::product(vec![Factor1D::sin(2.0), Factor1D::Exp { rate: 0.5 }, Factor1D::cos(1.0)]));
        let composed = AffinePullback::compose(f.clone(), map.matrix().clone(), map.offset().clone());
        for kind in [ElementKind::Lagrange(2), ElementKind::CrouzeixRaviart] {
            let e = FiniteElement::new(kind, 3).unwrap();
            for d in e.dofs() {
                let a = d.evaluate_pullback(f.as_ref(), &map, 10);
                let b = d.evaluate(&composed, 10);
                assert!((a - b).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn commuting_diagram() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = Separable::product(vec![Factor1D::sin(1.5), Factor1D::cos(0.5), Factor1D::Exp { rate: 1.0 }]);
        let opts = SeminormOptions::default();
        for kind in [ElementKind::Lagrange(1), ElementKind::Lagrange(3), ElementKind::CrouzeixRaviart] {
            let e = FiniteElement::new(kind, 3).unwrap();
            assert!(commuting_check(&e, &f, &tet(), 100, &mut rng, &opts).unwrap() < 1e-10);
        }
    }

    #[test]
    fn ratio_of_reproduced_polynomial_is_zero() {
        let e = FiniteElement::lagrange(2, 2).unwrap();
        let t = Simplex::reference(2);
        let f = MultiPoly::monomial(2, MultiIndex::new(&[1, 1]), 1.0);
        let r = error_ratio(&e, &f, &t, 1, Exponent::Two, 2, &SeminormOptions::default()).unwrap();
        assert!(r.error < 1e-12 && r.ratio == 0.0);
        let g = MultiPoly::monomial(2, MultiIndex::new(&[3, 0]), 1.0);
        let p1 = FiniteElement::lagrange(2, 1).unwrap();
        let r = error_ratio(&p1, &g, &t, 1, Exponent::Two, 1, &SeminormOptions::default()).unwrap();
        assert!(r.ratio > 0.0 && r.ratio.is_finite());
        assert!(error_ratio(&p1, &g, &t, 1, Exponent::Two, 2, &SeminormOptions::default()).is_err());
    }
}
