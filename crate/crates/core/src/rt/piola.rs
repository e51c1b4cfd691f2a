use std::sync::Arc;

use nalgebra::DMatrix;

use crate::geometry::{AffineMap, Simplex};
use crate::poly::{integrate_on, AffinePullback, MultiIndex, MultiPoly, QuadratureRule, SmoothField, VectorPoly};

/// `Ψ v̂ = v` with `v(Φ(x̂)) = A v̂(x̂) / |det A|` for `Φ(x̂) = A x̂ + b`.
#[derive(Clone, Debug)]
pub struct PiolaMap {
    map: AffineMap,
    inverse: AffineMap,
    det: f64,
}

impl PiolaMap {
    pub fn new(map: AffineMap) -> Self {
        let det = map.determinant();
        let inverse = map.inverse();
        PiolaMap { map, inverse, det }
    }

    pub fn map(&self) -> &AffineMap {
        &self.map
    }

    pub fn determinant(&self) -> f64 {
        self.det
    }

    fn push_mix(&self) -> DMatrix<f64> {
        self.map.matrix() / self.det.abs()
    }

    fn pull_mix(&self) -> DMatrix<f64> {
        self.inverse.matrix() * self.det.abs()
    }

    pub fn push_poly(&self, v: &VectorPoly) -> VectorPoly {
        v.transform(&self.push_mix(), self.inverse.matrix(), self.inverse.offset())
    }

    pub fn pull_poly(&self, v: &VectorPoly) -> VectorPoly {
        v.transform(&self.pull_mix(), self.map.matrix(), self.map.offset())
    }

    pub fn push_field(&self, v: Arc<dyn SmoothField>) -> AffinePullback {
        AffinePullback::new(v, self.inverse.matrix().clone(), self.inverse.offset().clone(), self.push_mix())
    }

    pub fn pull_field(&self, v: Arc<dyn SmoothField>) -> AffinePullback {
        AffinePullback::new(v, self.map.matrix().clone(), self.map.offset().clone(), self.pull_mix())
    }
}

/// Relative residuals of the three Piola identities on `T̂ = conv{0, e₁, …}`
/// and `T = Φ(T̂)`:
/// `∫_T div v φ = ∫_T̂ div v̂ φ̂`, `∫_T v·∇φ = ∫_T̂ v̂·∇̂φ̂` and
/// `∫_∂T v·n φ = ∫_∂T̂ v̂·n̂ φ̂`, with `v = Ψ v̂`, `φ = φ̂ ∘ Φ⁻¹`.
pub fn piola_identities(piola: &PiolaMap, v_hat: &VectorPoly, phi_hat: &MultiPoly) -> [f64; 3] {
    let d = v_hat.dim();
    let t_hat = Simplex::reference(d);
    let t = t_hat.transformed(piola.map()).expect("nondegenerate image");
    let v = piola.push_poly(v_hat);
    let inv = piola.map().inverse();
    let phi = phi_hat.compose_affine(inv.matrix(), inv.offset());
    let deg = v_hat.degree() + phi_hat.degree();
    let rule = QuadratureRule::for_degree(d, deg);
    let div = |w: &VectorPoly, p: &MultiPoly, s: &Simplex| {
        let dv = w.divergence();
        integrate_on(&rule, s.vertices(), s.measure(), |x| dv.eval(x) * p.eval(x))
    };
    let grad = |w: &VectorPoly, p: &MultiPoly, s: &Simplex| {
        integrate_on(&rule, s.vertices(), s.measure(), |x| {
            (0..d).map(|c| w.0[c].eval(x) * p.eval_derivative(MultiIndex::unit(c), x)).sum()
        })
    };
    let facet_rule = QuadratureRule::for_degree(d - 1, deg);
    let flux = |w: &VectorPoly, p: &MultiPoly, s: &Simplex| -> f64 {
        s.facets()
            .iter()
            .map(|f| {
                integrate_on(&facet_rule, &f.vertices, f.measure, |x| {
                    (0..d).map(|c| w.0[c].eval(x) * f.normal[c]).sum::<f64>() * p.eval(x)
                })
            })
            .sum()
    };
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1.0);
    [
        rel(div(&v, &phi, &t), div(v_hat, phi_hat, &t_hat)),
        rel(grad(&v, &phi, &t), grad(v_hat, phi_hat, &t_hat)),
        rel(flux(&v, &phi, &t), flux(v_hat, phi_hat, &t_hat)),
    ]
}
