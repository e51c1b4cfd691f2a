use crate::geometry::Simplex;
use crate::linalg::numerical_rank;
use crate::poly::{poly_space_basis, MultiIndex, MultiPoly, QuadratureRule, VectorPoly};
use crate::{Error, Result};
use nalgebra::DMatrix;

/// `(k+1)(k+3)` for triangles, `(k+1)(k+2)(k+4)/2` for tetrahedra.
pub fn rt_dimension(dim: usize, k: u32) -> usize {
    let k = k as usize;
    match dim {
        2 => (k + 1) * (k + 3),
        3 => (k + 1) * (k + 2) * (k + 4) / 2,
        _ => panic!("RT spaces are built for d = 2, 3"),
    }
}

/// `RT^k` on the reference simplex `conv{0, e₁, …, e_d}`, with an
/// `L²`-orthonormal basis.
#[derive(Clone, Debug)]
pub struct RTSpace {
    dim: usize,
    k: u32,
    basis: Vec<VectorPoly>,
}

impl RTSpace {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> u32 {
        self.k
    }

    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[VectorPoly] {
        &self.basis
    }
}

/// `Σ_c ∫_T a_c b_c`, exact for the given polynomial degree.
pub fn vector_l2_inner(a: &VectorPoly, b: &VectorPoly, t: &Simplex) -> f64 {
    let deg = a.degree() + b.degree();
    let rule = QuadratureRule::for_degree(t.dim(), deg);
    crate::poly::integrate_on(&rule, t.vertices(), t.measure(), |x| {
        a.0.iter().zip(&b.0).map(|(p, q)| p.eval(x) * q.eval(x)).sum()
    })
}

/// Monomial fields `e_c x^β` (`|β| ≤ k`) and `x x^β` (`|β| = k`),
/// orthonormalised on the reference simplex.
pub fn build_rt_space(dim: usize, k: u32) -> Result<RTSpace> {
    if !(2..=3).contains(&dim) {
        return Err(Error::InvalidParameter(format!("RT spaces need d = 2 or 3, got {dim}")));
    }
    let mut raw = Vec::new();
    for c in 0..dim {
        for m in poly_space_basis(dim, k) {
            let mut v = VectorPoly::zero(dim, dim);
            v.0[c] = m;
            raw.push(v);
        }
    }
    for beta in MultiIndex::all_of_order(dim, k) {
        let m = MultiPoly::monomial(dim, beta, 1.0);
        raw.push(VectorPoly((0..dim).map(|c| &MultiPoly::variable(dim, c) * &m).collect()));
    }
    let t = Simplex::reference(dim);
    let n = raw.len();
    let gram = DMatrix::from_fn(n, n, |i, j| vector_l2_inner(&raw[i], &raw[j], &t));
    let rank = numerical_rank(&gram, 1e-12);
    if rank != n || n != rt_dimension(dim, k) {
        return Err(Error::RankDeficient { rank, size: n });
    }
    let mut basis: Vec<VectorPoly> = Vec::with_capacity(n);
    for v in raw {
        let mut w = v;
        for _ in 0..2 {
            for b in &basis {
                let c = vector_l2_inner(&w, b, &t);
                w = w.sub(&b.scaled(c));
            }
        }
        let norm = vector_l2_inner(&w, &w, &t).sqrt();
        basis.push(w.scaled(1.0 / norm));
    }
    Ok(RTSpace { dim, k, basis })
}
