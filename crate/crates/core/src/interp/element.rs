use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::geometry::{barycentric_lattice, AffineMap, Simplex};
use crate::linalg::solve;
use crate::poly::{integrate_on, poly_space_basis, MultiIndex, MultiPoly, QuadratureRule, SmoothField};
use crate::{Error, Result};

const DUALITY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ElementKind {
    Lagrange(u32),
    CrouzeixRaviart,
}

impl std::fmt::Display for ElementKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ElementKind::Lagrange(k) => write!(f, "P{k}"),
            ElementKind::CrouzeixRaviart => write!(f, "CR"),
        }
    }
}

impl std::str::FromStr for ElementKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        if lower == "cr" {
            return Ok(ElementKind::CrouzeixRaviart);
        }
        lower
            .strip_prefix('p')
            .and_then(|k| k.parse().ok())
            .filter(|&k| k >= 1)
            .map(ElementKind::Lagrange)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown element '{s}' (expected P1, P2, ... or CR)")))
    }
}

/// A degree of freedom, given on the reference simplex.
#[derive(Clone, Debug, PartialEq)]
pub enum Dof {
    Point(DVector<f64>),
    /// Mean value over the facet with these vertices.
    FacetMean(Vec<DVector<f64>>),
    /// Directional derivative at a point.
    PointDerivative { point: DVector<f64>, direction: DVector<f64> },
}

impl Dof {
    /// `χ(f ∘ Φ)`, where `f` lives on the physical simplex `Φ(T̂)`.
    pub fn evaluate_pullback(&self, f: &dyn SmoothField, map: &AffineMap, quad_degree: u32) -> f64 {
        match self {
            Dof::Point(p) => f.value(0, map.apply(p.as_slice()).as_slice()),
            Dof::FacetMean(vertices) => {
                let phys: Vec<DVector<f64>> = vertices.iter().map(|v| map.apply(v.as_slice())).collect();
                let rule = QuadratureRule::for_degree(vertices.len() - 1, quad_degree);
                // unit measure turns the integral into the mean value
                integrate_on(&rule, &phys, 1.0, |x| f.value(0, x))
            }
            Dof::PointDerivative { point, direction } => {
                let x = map.apply(point.as_slice());
                let v = map.matrix() * direction;
                (0..v.len()).map(|i| v[i] * f.derivative(0, MultiIndex::unit(i), x.as_slice())).sum()
            }
        }
    }

    pub fn evaluate(&self, f: &dyn SmoothField, quad_degree: u32) -> f64 {
        self.evaluate_pullback(f, &AffineMap::identity(f.dim()), quad_degree)
    }
}

/// A scalar finite element `{T̂, P̂, Σ̂}` with its dual (nodal) basis.
#[derive(Clone, Debug)]
pub struct FiniteElement {
    kind: ElementKind,
    reference: Simplex,
    degree: u32,
    shape_space: Vec<MultiPoly>,
    dofs: Vec<Dof>,
    basis: Vec<MultiPoly>,
}

impl FiniteElement {
    pub fn new(kind: ElementKind, dim: usize) -> Result<Self> {
        Self::on(kind, Simplex::reference(dim))
    }

    pub fn on(kind: ElementKind, reference: Simplex) -> Result<Self> {
        match kind {
            ElementKind::Lagrange(k) => Self::lagrange_on(reference, k),
            ElementKind::CrouzeixRaviart => Self::crouzeix_raviart_on(reference),
        }
    }

    pub fn lagrange(dim: usize, k: u32) -> Result<Self> {
        Self::lagrange_on(Simplex::reference(dim), k)
    }

    /// Degree-`k` Lagrange element with nodes on the uniform barycentric lattice.
    pub fn lagrange_on(reference: Simplex, k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("Lagrange elements need degree k ≥ 1".into()));
        }
        // vertices first (in vertex order), then edge, face and interior nodes
        let mut nodes = barycentric_lattice(reference.dim(), k as usize);
        nodes.sort_by_key(|l| (l.iter().filter(|&&i| i > 0).count(), std::cmp::Reverse(l.clone())));
        let dofs = nodes
            .into_iter()
            .map(|l| {
                let lambda: Vec<f64> = l.iter().map(|&i| i as f64 / k as f64).collect();
                Dof::Point(reference.barycentric_point(&lambda))
            })
            .collect();
        let shape = poly_space_basis(reference.dim(), k);
        Self::from_dofs(ElementKind::Lagrange(k), reference, k, shape, dofs)
    }

    pub fn crouzeix_raviart(dim: usize) -> Result<Self> {
        Self::crouzeix_raviart_on(Simplex::reference(dim))
    }

    /// `P1` with facet mean values, facets ordered by opposite vertex.
    pub fn crouzeix_raviart_on(reference: Simplex) -> Result<Self> {
        let dofs = reference.facets().into_iter().map(|f| Dof::FacetMean(f.vertices)).collect();
        let shape = poly_space_basis(reference.dim(), 1);
        Self::from_dofs(ElementKind::CrouzeixRaviart, reference, 1, shape, dofs)
    }

    /// Builds the dual basis `θ_j` with `χ_i(θ_j) = δ_ij`; fails if the
    /// degrees of freedom are not unisolvent on the shape space.
    pub fn from_dofs(kind: ElementKind, reference: Simplex, degree: u32, shape_space: Vec<MultiPoly>, dofs: Vec<Dof>) -> Result<Self> {
        let n = dofs.len();
        if shape_space.len() != n {
            return Err(Error::InvalidParameter(format!("{} shape functions for {n} degrees of freedom", shape_space.len())));
        }
        let d = DMatrix::from_fn(n, n, |i, j| dofs[i].evaluate(&shape_space[j], degree));
        let c = solve(&d, &DMatrix::identity(n, n))?;
        let basis = (0..n)
            .map(|j| (0..n).fold(MultiPoly::zero(reference.dim()), |acc, k| &acc + &shape_space[k].scaled(c[(k, j)])))
            .collect();
        let element = FiniteElement { kind, reference, degree, shape_space, dofs, basis };
        let residual = element.duality_residual();
        if residual > DUALITY_TOL {
            return Err(Error::Singular(format!("dual basis residual {residual:e}")));
        }
        Ok(element)
    }

    pub fn kind(&self) -> ElementKind {
        self.kind
    }

    pub fn reference(&self) -> &Simplex {
        &self.reference
    }

    pub fn dim(&self) -> usize {
        self.reference.dim()
    }

    /// Polynomial degree `k` of the shape space.
    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn n_dofs(&self) -> usize {
        self.dofs.len()
    }

    pub fn dofs(&self) -> &[Dof] {
        &self.dofs
    }

    pub fn shape_space(&self) -> &[MultiPoly] {
        &self.shape_space
    }

    pub fn basis(&self) -> &[MultiPoly] {
        &self.basis
    }

    /// `max |χ_i(θ_j) − δ_ij|`.
    pub fn duality_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, dof) in self.dofs.iter().enumerate() {
            for (j, theta) in self.basis.iter().enumerate() {
                let delta = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dof.evaluate(theta, self.degree) - delta).abs());
            }
        }
        worst
    }
}
