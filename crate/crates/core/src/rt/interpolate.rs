use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::dofs::rt_dofs;
use super::piola::PiolaMap;
use super::space::RTSpace;
use crate::geometry::{to_standard_position, AffineMap, Simplex};
use crate::interp::VANISHING_SEMINORM;
use crate::linalg::solve;
use crate::poly::{
    integrate_on, seminorm, AffinePullback, Exponent, MultiIndex, QuadratureRule, SeminormOptions, SmoothField, VectorPoly,
};
use crate::shape::param_h_t;
use crate::{Error, Result};

/// The reference basis pushed to `T` by the Piola transform of the
/// vertex-order map `Φ_T`.
pub fn physical_basis(space: &RTSpace, t: &Simplex) -> Vec<VectorPoly> {
    let piola = PiolaMap::new(t.reference_map());
    space.basis().iter().map(|b| piola.push_poly(b)).collect()
}

/// A field `Ψ_T ŵ` of `RT^k(T)` kept in reference coordinates. Evaluation
/// goes through `Φ_T⁻¹`, which avoids the cancellation of expanding `ŵ ∘ Φ_T⁻¹`
/// into physical monomials on small or distant simplices.
pub struct RtInterpolant {
    reference: VectorPoly,
    piola: PiolaMap,
    field: AffinePullback,
}

impl RtInterpolant {
    pub fn new(reference: VectorPoly, map: AffineMap) -> Self {
        let piola = PiolaMap::new(map);
        let field = piola.push_field(Arc::new(reference.clone()));
        RtInterpolant { reference, piola, field }
    }

    /// `ŵ` on `conv{0, e₁, …, e_d}`.
    pub fn reference(&self) -> &VectorPoly {
        &self.reference
    }

    pub fn piola(&self) -> &PiolaMap {
        &self.piola
    }

    /// The field expanded in physical monomials.
    pub fn to_physical(&self) -> VectorPoly {
        self.piola.push_poly(&self.reference)
    }
}

impl SmoothField for RtInterpolant {
    fn dim(&self) -> usize {
        self.reference.dim()
    }

    fn components(&self) -> usize {
        self.reference.components()
    }

    fn polynomial_degree(&self) -> Option<u32> {
        Some(self.reference.degree())
    }

    fn derivative(&self, component: usize, beta: MultiIndex, x: &[f64]) -> f64 {
        self.field.derivative(component, beta, x)
    }
}

/// RT interpolation on a fixed simplex, with the degree-of-freedom matrix of
/// the pushed reference basis inverted once.
#[derive(Clone, Debug)]
pub struct RtInterpolator {
    k: u32,
    dofs: super::dofs::RTDofSet,
    map: AffineMap,
    basis: Vec<VectorPoly>,
    inverse: DMatrix<f64>,
}

impl RtInterpolator {
    pub fn new(space: &RTSpace, t: &Simplex) -> Result<Self> {
        if t.dim() != space.dim() {
            return Err(Error::InvalidParameter("space and simplex dimensions differ".into()));
        }
        let dofs = rt_dofs(space.order(), t)?;
        let map = t.reference_map();
        let piola = PiolaMap::new(map.clone());
        let n = space.dimension();
        let mut matrix = DMatrix::zeros(n, n);
        for (j, b) in space.basis().iter().enumerate() {
            let pushed = piola.push_field(Arc::new(b.clone()));
            for (i, value) in dofs.evaluate(&pushed, 2 * space.order() + 1).into_iter().enumerate() {
                matrix[(i, j)] = value;
            }
        }
        let inverse = solve(&matrix, &DMatrix::identity(n, n))?;
        Ok(RtInterpolator { k: space.order(), dofs, map, basis: space.basis().to_vec(), inverse })
    }

    /// Coefficients of `I_T v` in the pushed reference basis.
    pub fn coefficients(&self, v: &dyn SmoothField, opts: &SeminormOptions) -> Result<DVector<f64>> {
        let d = self.dofs.simplex().dim();
        if v.components() != d || v.dim() != d {
            return Err(Error::InvalidParameter("RT interpolation needs a d-vector field on a d-simplex".into()));
        }
        let qdeg = match v.polynomial_degree() {
            Some(q) => q + self.k,
            None => opts.quad_degree.max(2 * self.k + 2),
        };
        let rhs = DVector::from_vec(self.dofs.evaluate(v, qdeg));
        Ok(&self.inverse * rhs)
    }

    pub fn interpolate(&self, v: &dyn SmoothField, opts: &SeminormOptions) -> Result<RtInterpolant> {
        let coeffs = self.coefficients(v, opts)?;
        let d = self.dofs.simplex().dim();
        let reference = self.basis.iter().zip(coeffs.iter()).fold(VectorPoly::zero(d, d), |acc, (b, c)| acc.add(&b.scaled(*c)));
        Ok(RtInterpolant::new(reference, self.map.clone()))
    }
}

/// `I_T^{RT} v`: the field in `RT^k(T)` with the same degrees of freedom as `v`.
pub fn rt_interpolate(space: &RTSpace, v: &dyn SmoothField, t: &Simplex, opts: &SeminormOptions) -> Result<RtInterpolant> {
    RtInterpolator::new(space, t)?.interpolate(v, opts)
}

/// `‖I_{T̂} v̂ − Ψ⁻¹ I_T Ψ v̂‖_{L²(T̂)} / ‖v̂‖_{L²(T̂)}` with `T = Φ(T̂)`.
pub fn rt_commuting_check(space: &RTSpace, v_hat: Arc<dyn SmoothField>, map: &AffineMap, opts: &SeminormOptions) -> Result<f64> {
    let d = space.dim();
    let t_hat = Simplex::reference(d);
    let t = t_hat.transformed(map)?;
    let piola = PiolaMap::new(map.clone());
    let direct = rt_interpolate(space, v_hat.as_ref(), &t_hat, opts)?;
    let pushed = piola.push_field(v_hat.clone());
    let through = piola.pull_field(Arc::new(rt_interpolate(space, &pushed, &t, opts)?));
    let qdeg = match v_hat.polynomial_degree() {
        Some(q) => 2 * q.max(space.order() + 1),
        None => opts.quad_degree,
    };
    let rule = QuadratureRule::for_degree(d, qdeg);
    let err = integrate_on(&rule, t_hat.vertices(), t_hat.measure(), |x| {
        (0..d).map(|c| (direct.value(c, x) - through.value(c, x)).powi(2)).sum()
    })
    .sqrt();
    let norm = integrate_on(&rule, t_hat.vertices(), t_hat.measure(), |x| (0..d).map(|c| v_hat.value(c, x).powi(2)).sum())
        .sqrt();
    Ok(err / norm.max(f64::MIN_POSITIVE))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RtErrorRatio {
    pub error: f64,
    pub bound_factor: f64,
    pub ratio: f64,
    pub h_t: f64,
    #[serde(rename = "H_T")]
    pub big_h_t: f64,
    /// `|v|_{H^{ℓ+1}(T)^d}`.
    pub seminorm: f64,
}

/// `‖I_T v − v‖_{L²(T)^d}` against `H_T h_T^ℓ |v|_{H^{ℓ+1}(T)^d}`.
pub fn rt_error_ratio(space: &RTSpace, v: &dyn SmoothField, t: &Simplex, l: u32, opts: &SeminormOptions) -> Result<RtErrorRatio> {
    if l > space.order() {
        return Err(Error::InvalidParameter(format!("need ℓ ≤ k, got ℓ={l}, k={}", space.order())));
    }
    let iv = rt_interpolate(space, v, t, opts)?;
    let diff = crate::poly::Difference { a: v, b: &iv };
    let error = seminorm(&diff, t, 0, Exponent::Two, opts)?;
    let semi = seminorm(v, t, l + 1, Exponent::Two, opts)?;
    let big_h_t = param_h_t(&to_standard_position(t)?);
    let h_t = t.diameter();
    let bound_factor = big_h_t * h_t.powi(l as i32) * semi;
    let ratio = if semi < VANISHING_SEMINORM {
        if error < VANISHING_SEMINORM {
            0.0
        } else {
            return Err(Error::VanishingSeminorm(semi));
        }
    } else {
        error / bound_factor
    };
    Ok(RtErrorRatio { error, bound_factor, ratio, h_t, big_h_t, seminorm: semi })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{Factor1D, MultiPoly, Separable};
    use crate::rt::{build_rt_space, rt_dofs, vector_l2_inner};

    #[test]
    fn lowest_order_interpolant_of_x_squared() {
        let space = build_rt_space(2, 0).unwrap();
        let t = Simplex::reference(2);
        let v = VectorPoly(vec![MultiPoly::variable(2, 0).pow(2), MultiPoly::zero(2)]);
        let iv = rt_interpolate(&space, &v, &t, &SeminormOptions::default()).unwrap();
        let third = 1.0 / 3.0;
        let expected = VectorPoly(vec![MultiPoly::affine(0.0, &[third, 0.0]), MultiPoly::affine(0.0, &[0.0, third])]);
        assert!(iv.to_physical().sub(&expected).0.iter().all(|c| c.max_coefficient() < 1e-12));
    }

    #[test]
    fn projection_on_space() {
        let t = Simplex::from_points(&[[0.1, 0.2, 0.0], [1.0, 0.1, 0.3], [0.2, 1.1, 0.1], [0.3, 0.4, 0.9]]).unwrap();
        let opts = SeminormOptions::default();
        for k in 0..=2 {
            let space = build_rt_space(3, k).unwrap();
            for b in physical_basis(&space, &t) {
                let iv = rt_interpolate(&space, &b, &t, &opts).unwrap();
                let diff = iv.to_physical().sub(&b);
                assert!(vector_l2_inner(&diff, &diff, &t).sqrt() < 1e-10 * vector_l2_inner(&b, &b, &t).sqrt());
            }
        }
    }

    #[test]
    fn dofs_of_interpolant_match() {
        let t = Simplex::from_points(&[[0.0, 0.0], [1.0, 0.2], [0.3, 0.8]]).unwrap();
        let v = Separable::product(vec![Factor1D::sin(1.0), Factor1D::Exp { rate: 0.3 }]);
        let field = crate::poly::Components(vec![Arc::new(v.clone()), Arc::new(Separable::product(vec![Factor1D::cos(2.0), Factor1D::One]))]);
        let space = build_rt_space(2, 1).unwrap();
        let iv = rt_interpolate(&space, &field, &t, &SeminormOptions::default()).unwrap();
        let dofs = rt_dofs(1, &t).unwrap();
        let a = dofs.evaluate(&field, 12);
        let b = dofs.evaluate(&iv, 4);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn commuting_with_piola() {
        let map = AffineMap::new(
            DMatrix::from_row_slice(3, 3, &[1.0, 0.3, -0.2, 0.1, 0.6, 0.4, -0.3, 0.2, 1.5]),
            DVector::from_vec(vec![0.2, -0.1, 0.5]),
        )
        .unwrap();
        let x = MultiPoly::variable(3, 0);
        let y = MultiPoly::variable(3, 1);
        let v: Arc<dyn SmoothField> = Arc::new(VectorPoly(vec![x.pow(2), y.pow(2), &x * &y]));
        for k in 0..=1 {
            let space = build_rt_space(3, k).unwrap();
            assert!(rt_commuting_check(&space, v.clone(), &map, &SeminormOptions::default()).unwrap() < 1e-9);
        }
    }
}
