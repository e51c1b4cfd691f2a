use nalgebra::DVector;

use crate::geometry::{AffineMap, Facet, Simplex};
use crate::poly::{poly_space_basis, MultiPoly, QuadratureRule, SmoothField};
use crate::{Error, Result};

/// An RT degree of freedom on a physical simplex.
#[derive(Clone, Debug)]
pub enum RtDof {
    /// `v ↦ ∫_F v·n_F q ds`, `q` in facet-local coordinates `ŝ` with
    /// `x = p₀ + Σ ŝ_j (p_j − p₀)` over the facet vertices `p`.
    FacetMoment { facet: usize, weight: MultiPoly },
    /// `v ↦ ∫_T (B v)_c q dx` with `B` the linear part of `Φ_T⁻¹` and `q` in
    /// the reference coordinates `x̂ = Φ_T⁻¹(x)`. These span the same
    /// functionals as the moments of `v_c` but keep the degree-of-freedom
    /// matrix of the Piola-pushed basis equal to the reference one.
    InteriorMoment { component: usize, weight: MultiPoly },
}

#[derive(Clone, Debug)]
pub struct RTDofSet {
    k: u32,
    simplex: Simplex,
    facets: Vec<Facet>,
    to_reference: AffineMap,
    functionals: Vec<RtDof>,
}

pub fn rt_dofs(k: u32, t: &Simplex) -> Result<RTDofSet> {
    let d = t.dim();
    let facets = t.facets();
    if let Some(f) = facets.iter().find(|f| !(f.measure > 0.0)) {
        return Err(Error::Degenerate(format!("facet opposite vertex {} has zero measure", f.opposite)));
    }
    let mut functionals = Vec::new();
    for f in &facets {
        for q in poly_space_basis(d - 1, k) {
            functionals.push(RtDof::FacetMoment { facet: f.opposite, weight: q });
        }
    }
    if k >= 1 {
        for component in 0..d {
            for q in poly_space_basis(d, k - 1) {
                functionals.push(RtDof::InteriorMoment { component, weight: q });
            }
        }
    }
    Ok(RTDofSet { k, simplex: t.clone(), facets, to_reference: t.reference_map().inverse(), functionals })
}

impl RTDofSet {
    pub fn order(&self) -> u32 {
        self.k
    }

    pub fn len(&self) -> usize {
        self.functionals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functionals.is_empty()
    }

    pub fn functionals(&self) -> &[RtDof] {
        &self.functionals
    }

    pub fn simplex(&self) -> &Simplex {
        &self.simplex
    }

    /// Values of all functionals on `v`, with quadrature exact to `quad_degree`.
    pub fn evaluate(&self, v: &dyn SmoothField, quad_degree: u32) -> Vec<f64> {
        let d = self.simplex.dim();
        assert_eq!(v.components(), d, "RT degrees of freedom need a d-vector field");
        let facet_rule = QuadratureRule::for_degree(d - 1, quad_degree);
        let cell_rule = QuadratureRule::for_degree(d, quad_degree);
        let mut flux_samples: Vec<Vec<(f64, Vec<f64>)>> = Vec::with_capacity(self.facets.len());
        for f in &self.facets {
            let scale = f.measure / QuadratureRule::reference_volume(d - 1);
            let samples = facet_rule
                .barycentric()
                .iter()
                .zip(facet_rule.weights())
                .map(|(lambda, w)| {
                    let x = lambda.iter().zip(&f.vertices).fold(DVector::zeros(d), |acc, (l, p)| acc + p * *l);
                    let vn: f64 = (0..d).map(|c| v.value(c, x.as_slice()) * f.normal[c]).sum();
                    (w * scale * vn, lambda[1..].to_vec())
                })
                .collect();
            flux_samples.push(samples);
        }
        let cell_scale = self.simplex.measure() / QuadratureRule::reference_volume(d);
        let cell_samples: Vec<(f64, Vec<f64>, Vec<f64>)> = cell_rule
            .barycentric()
            .iter()
            .zip(cell_rule.weights())
            .map(|(lambda, w)| {
                let x = self.simplex.barycentric_point(lambda);
                let values = DVector::from_fn(d, |c, _| v.value(c, x.as_slice()));
                let contravariant = self.to_reference.matrix() * values;
                let xh = self.to_reference.apply(x.as_slice());
                (w * cell_scale, contravariant.as_slice().to_vec(), xh.as_slice().to_vec())
            })
            .collect();
        self.functionals
            .iter()
            .map(|dof| match dof {
                RtDof::FacetMoment { facet, weight } => flux_samples[*facet].iter().map(|(wv, s)| wv * weight.eval(s)).sum(),
                RtDof::InteriorMoment { component, weight } => {
                    cell_samples.iter().map(|(w, vals, xh)| w * vals[*component] * weight.eval(xh)).sum()
                }
            })
            .collect()
    }
}
