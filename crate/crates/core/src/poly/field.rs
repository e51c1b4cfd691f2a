//! Smooth scalar and vector fields with closed-form partial derivatives.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use nalgebra::{DMatrix, DVector};

use super::multipoly::{MultiIndex, MultiPoly, VectorPoly};
use crate::{Error, Result};

/// A (possibly vector-valued) function on a subset of `R^dim` whose partial
/// derivatives are available in closed form.
pub trait SmoothField: Send + Sync {
    fn dim(&self) -> usize;

    fn components(&self) -> usize {
        1
    }

    /// Highest derivative order provided; `None` means unlimited.
    fn max_order(&self) -> Option<u32> {
        None
    }

    /// `Some(q)` if every component is a polynomial of degree at most `q`.
    fn polynomial_degree(&self) -> Option<u32> {
        None
    }

    fn derivative(&self, component: usize, beta: MultiIndex, x: &[f64]) -> f64;

    fn value(&self, component: usize, x: &[f64]) -> f64 {
        self.derivative(component, MultiIndex::ZERO, x)
    }
}

/// Fails if `field` cannot supply derivatives of order `order`.
pub fn ensure_order(field: &dyn SmoothField, order: u32) -> Result<()> {
    match field.max_order() {
        Some(available) if available < order => Err(Error::DerivativeOrder { requested: order, available }),
        _ => Ok(()),
    }
}

impl SmoothField for MultiPoly {
    fn dim(&self) -> usize {
        MultiPoly::dim(self)
    }

    fn polynomial_degree(&self) -> Option<u32> {
        Some(self.degree())
    }

    fn derivative(&self, component: usize, beta: MultiIndex, x: &[f64]) -> f64 {
        debug_assert_eq!(component, 0);
        self.eval_derivative(beta, x)
    }
}

impl SmoothField for VectorPoly {
    fn dim(&self) -> usize {
        VectorPoly::dim(self)
    }

    fn components(&self) -> usize {
        self.0.len()
    }

    fn polynomial_degree(&self) -> Option<u32> {
        Some(self.degree())
    }

    fn derivative(&self, component: usize, beta: MultiIndex, x: &[f64]) -> f64 {
        self.0[component].eval_derivative(beta, x)
    }
}

/// `a − b` for borrowed fields of equal shape.
pub struct Difference<'a> {
    pub a: &'a dyn SmoothField,
    pub b: &'a dyn SmoothField,
}

impl SmoothField for Difference<'_> {
    fn dim(&self) -> usize {
        self.a.dim()
    }

    fn components(&self) -> usize {
        self.a.components()
    }

    fn max_order(&self) -> Option<u32> {
        match (self.a.max_order(), self.b.max_order()) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, None) | (None, x) => x,
        }
    }

    fn polynomial_degree(&self) -> Option<u32> {
        Some(self.a.polynomial_degree()?.max(self.b.polynomial_degree()?))
    }

    fn derivative(&self, component: usize, beta: MultiIndex, x: &[f64]) -> f64 {
        self.a.derivative(component, beta, x) - self.b.derivative(component, beta, x)
    }
}

/// One-dimensional factor of a separable term.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Factor1D {
    One,
    /// `sin(freq · t + phase)`
    Sin { freq: f64, phase: f64 },
    /// `exp(rate · t)`
    Exp { rate: f64 },
    /// `t^n`
    Power(u32),
}

impl Factor1D {
    pub fn cos(freq: f64) -> Self {
        Factor1D::Sin { freq, phase: std::f64::consts::FRAC_PI_2 }
    }

    pub fn sin(freq: f64) -> Self {
        Factor1D::Sin { freq, phase: 0.0 }
    }

    fn derivative(&self, n: u32, t: f64) -> f64 {
        match *self {
            Factor1D::One => {
                if n == 0 {
                    1.0
                } else {
                    0.0
                }
            }
            Factor1D::Sin { freq, phase } => {
                freq.powi(n as i32) * (freq * t + phase + f64::from(n) * std::f64::consts::FRAC_PI_2).sin()
            }
            Factor1D::Exp { rate } => rate.powi(n as i32) * (rate * t).exp(),
            Factor1D::Power(p) => {
                if n > p {
                    0.0
                } else {
                    let falling: f64 = (0..n).map(|j| f64::from(p - j)).product();
                    falling * t.powi((p - n) as i32)
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeparableTerm {
    pub coeff: f64,
    pub factors: Vec<Factor1D>,
}

/// Scalar field `Σ_k c_k Π_i f_{k,i}(x_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Separable {
    dim: usize,
    terms: Vec<SeparableTerm>,
}

impl Separable {
    pub fn new(dim: usize, terms: Vec<SeparableTerm>) -> Self {
        assert!(terms.iter().all(|t| t.factors.len() == dim));
        Separable { dim, terms }
    }

    /// Single product term `Π_i f_i(x_i)`.
    pub fn product(factors: Vec<Factor1D>) -> Self {
        Separable::new(factors.len(), vec![SeparableTerm { coeff: 1.0, factors }])
    }
}

impl SmoothField for Separable {
    fn dim(&self) -> usize {
        self.dim
    }

    fn derivative(&self, _component: usize, beta: MultiIndex, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                t.coeff
                    * t.factors
                        .iter()
                        .enumerate()
                        .map(|(i, f)| f.derivative(beta.get(i), x[i]))
                        .product::<f64>()
            })
            .sum()
    }
}

/// Vector field assembled from scalar fields.
#[derive(Clone)]
pub struct Components(pub Vec<Arc<dyn SmoothField>>);

impl SmoothField for Components {
    fn dim(&self) -> usize {
        self.0[0].dim()
    }

    fn components(&self) -> usize {
        self.0.len()
    }

    fn max_order(&self) -> Option<u32> {
        self.0.iter().filter_map(|f| f.max_order()).min()
    }

    fn polynomial_degree(&self) -> Option<u32> {
        self.0.iter().map(|f| f.polynomial_degree()).try_fold(0, |acc, d| d.map(|d| acc.max(d)))
    }

    fn derivative(&self, component: usize, beta: MultiIndex, x: &[f64]) -> f64 {
        self.0[component].derivative(0, beta, x)
    }
}

/// Linear combination `Σ c_k f_k` of fields with matching shape.
#[derive(Clone)]
pub struct Combination(pub Vec<(f64, Arc<dyn SmoothField>)>);

impl Combination {
    /// `a - b`
    pub fn difference(a: Arc<dyn SmoothField>, b: Arc<dyn SmoothField>) -> Self {
        Combination(vec![(1.0, a), (-1.0, b)])
    }
}

impl SmoothField for Combination {
    fn dim(&self) -> usize {
        self.0[0].1.dim()
    }

    fn components(&self) -> usize {
        self.0[0].1.components()
    }

    fn max_order(&self) -> Option<u32> {
        self.0.iter().filter_map(|(_, f)| f.max_order()).min()
    }

    fn polynomial_degree(&self) -> Option<u32> {
        self.0.iter().map(|(_, f)| f.polynomial_degree()).try_fold(0, |acc, d| d.map(|d| acc.max(d)))
    }

    fn derivative(&self, component: usize, beta: MultiIndex, x: &[f64]) -> f64 {
        self.0.iter().map(|(c, f)| c * f.derivative(component, beta, x)).sum()
    }
}

/// `g_i(x) = Σ_j M_ij f_j(B x + c)`.
///
/// With `M = I` this is the pullback `f ∘ Φ` for `Φ(x) = Bx + c`; with
/// `M = A / |det A|` and `B = A⁻¹` it is the Piola push-forward. Derivatives
/// follow from the chain rule: `∂^β` expands into a fixed linear combination
/// of `∂^γ f` with `|γ| = |β|`, cached per `β`.
pub struct AffinePullback {
    inner: Arc<dyn SmoothField>,
    matrix: DMatrix<f64>,
    offset: DVector<f64>,
    mix: DMatrix<f64>,
    expansions: RwLock<HashMap<MultiIndex, Arc<Vec<(MultiIndex, f64)>>>>,
}

impl AffinePullback {
    pub fn new(inner: Arc<dyn SmoothField>, matrix: DMatrix<f64>, offset: DVector<f64>, mix: DMatrix<f64>) -> Self {
        assert_eq!(matrix.nrows(), inner.dim());
        assert_eq!(mix.ncols(), inner.components());
        AffinePullback { inner, matrix, offset, mix, expansions: RwLock::new(HashMap::new()) }
    }

    /// `f ∘ Φ` with `Φ(x) = Bx + c`.
    pub fn compose(inner: Arc<dyn SmoothField>, matrix: DMatrix<f64>, offset: DVector<f64>) -> Self {
        let n = inner.components();
        Self::new(inner, matrix, offset, DMatrix::identity(n, n))
    }

    fn expansion(&self, beta: MultiIndex) -> Arc<Vec<(MultiIndex, f64)>> {
        if let Some(e) = self.expansions.read().unwrap().get(&beta) {
            return e.clone();
        }
        let d_in = self.inner.dim();
        // ∂/∂x_j = Σ_i B_ij ∂/∂y_i ; symbols ξ_i stand for ∂/∂y_i
        let mut op = MultiPoly::constant(d_in, 1.0);
        for j in 0..self.matrix.ncols() {
            let coeffs: Vec<f64> = (0..d_in).map(|i| self.matrix[(i, j)]).collect();
            let lin = MultiPoly::affine(0.0, &coeffs);
            op = &op * &lin.pow(beta.get(j));
        }
        let e: Arc<Vec<_>> = Arc::new(op.terms().map(|(g, c)| (*g, *c)).collect());
        self.expansions.write().unwrap().insert(beta, e.clone());
        e
    }
}

impl SmoothField for AffinePullback {
    fn dim(&self) -> usize {
        self.matrix.ncols()
    }

    fn components(&self) -> usize {
        self.mix.nrows()
    }

    fn max_order(&self) -> Option<u32> {
        self.inner.max_order()
    }

    fn polynomial_degree(&self) -> Option<u32> {
        self.inner.polynomial_degree()
    }

    fn derivative(&self, component: usize, beta: MultiIndex, x: &[f64]) -> f64 {
        let y = &self.matrix * DVector::from_column_slice(x) + &self.offset;
        let expansion = self.expansion(beta);
        let mut sum = 0.0;
        for j in 0..self.inner.components() {
            let m = self.mix[(component, j)];
            if m == 0.0 {
                continue;
            }
            let dj: f64 = expansion.iter().map(|(g, c)| c * self.inner.derivative(j, *g, y.as_slice())).sum();
            sum += m * dj;
        }
        sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn separable_derivatives_match_finite_differences() {
        let f = Separable::product(vec![Factor1D::sin(PI), Factor1D::Exp { rate: 0.5 }]);
        let x = [0.3, 0.8];
        let h = 1e-5;
        let fd = (f.value(0, &[x[0] + h, x[1]]) - f.value(0, &[x[0] - h, x[1]])) / (2.0 * h);
        let exact = f.derivative(0, MultiIndex::new(&[1, 0]), &x);
        assert!((fd - exact).abs() < 1e-8);
        let mixed = f.derivative(0, MultiIndex::new(&[2, 1]), &x);
        let expected = -PI * PI * (PI * x[0]).sin() * 0.5 * (0.5 * x[1]).exp();
        assert!((mixed - expected).abs() < 1e-12);
    }

    #[test]
    fn pullback_chain_rule_matches_composed_polynomial() {
        let mut p = MultiPoly::zero(2);
        p.add_term(MultiIndex::new(&[3, 0]), 1.0);
        p.add_term(MultiIndex::new(&[1, 2]), -2.0);
        let b = DMatrix::from_row_slice(2, 2, &[1.5, 0.2, -0.3, 0.7]);
        let c = DVector::from_vec(vec![0.1, 0.4]);
        let composed = p.compose_affine(&b, &c);
        let pull = AffinePullback::compose(Arc::new(p), b, c);
        let x = [0.35, -0.2];
        for beta in MultiIndex::all_up_to(2, 3) {
            let a = pull.derivative(0, beta, &x);
            let e = composed.eval_derivative(beta, &x);
            assert!((a - e).abs() < 1e-12 * (1.0 + e.abs()), "beta {beta}: {a} vs {e}");
        }
    }
}
