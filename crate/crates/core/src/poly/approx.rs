//! Best polynomial approximation on a simplex and the Verfürth constant.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::field::{ensure_order, Difference, SmoothField};
use super::multipoly::{MultiIndex, MultiPoly};
use super::quadrature::QuadratureRule;
use super::sobolev::{seminorm, Exponent, SeminormOptions};
use crate::geometry::Simplex;
use crate::linalg::{numerical_rank, solve_vector};
use crate::{Error, Result};

/// The `W^{order,p}` seminorm in which the approximation error is minimised
/// (`order = 0` is the `L^p` norm).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApproxNorm {
    pub order: u32,
    pub p: Exponent,
}

impl ApproxNorm {
    pub fn l2() -> Self {
        ApproxNorm { order: 0, p: Exponent::Two }
    }

    pub fn h_semi(order: u32) -> Self {
        ApproxNorm { order, p: Exponent::Two }
    }
}

#[derive(Clone, Debug)]
pub struct BestApprox {
    pub poly: MultiPoly,
    /// `|f − η|` in the norm that was minimised.
    pub error: f64,
}

const RANK_TOL: f64 = 1e-13;
const LAWSON_LATTICE: usize = 16;
const LAWSON_ITERATIONS: usize = 300;

/// Best approximation of the scalar field `f` from `𝒫^degree` on `simplex`.
///
/// Only the part of `η` of degree at least `norm.order` is determined by the
/// minimisation; the lower-degree part is the `L²` projection of the
/// remaining residual.
pub fn best_poly_approx(
    f: &dyn SmoothField,
    simplex: &Simplex,
    degree: u32,
    norm: ApproxNorm,
    opts: &SeminormOptions,
) -> Result<BestApprox> {
    if f.components() != 1 {
        return Err(Error::InvalidParameter("best approximation needs a scalar field".into()));
    }
    if f.dim() != simplex.dim() {
        return Err(Error::InvalidParameter("field and simplex dimensions differ".into()));
    }
    ensure_order(f, norm.order)?;
    let dim = simplex.dim();
    let local = LocalMonomials::new(simplex);
    let high: Vec<MultiPoly> = local.of_degrees(norm.order, degree);
    let betas = MultiIndex::all_of_order(dim, norm.order);

    let mut eta = MultiPoly::zero(dim);
    if !high.is_empty() {
        let coeffs = match norm.p {
            Exponent::Two => {
                let qdeg = quad_degree(f, degree, opts);
                least_squares(f, &high, &betas, simplex, qdeg)?
            }
            Exponent::Infinity => lawson(f, &high, &betas, simplex, opts.lattice.min(LAWSON_LATTICE))?,
        };
        for (c, b) in coeffs.iter().zip(&high) {
            eta = &eta + &b.scaled(*c);
        }
    }
    if norm.order > 0 {
        let low = local.of_degrees(0, (norm.order - 1).min(degree));
        let residual = Difference { a: f, b: &eta };
        let qdeg = quad_degree(f, degree, opts);
        let coeffs = least_squares(&residual, &low, &[MultiIndex::ZERO], simplex, qdeg)?;
        for (c, b) in coeffs.iter().zip(&low) {
            eta = &eta + &b.scaled(*c);
        }
    }
    let error = seminorm(&Difference { a: f, b: &eta }, simplex, norm.order, norm.p, opts)?;
    Ok(BestApprox { poly: eta, error })
}

fn quad_degree(f: &dyn SmoothField, degree: u32, opts: &SeminormOptions) -> u32 {
    match f.polynomial_degree() {
        Some(q) => q.max(degree) * 2,
        None => opts.quad_degree.max(2 * degree),
    }
}

/// Monomials in the centred reference coordinates `Φ_T⁻¹(x) − x̂_c` of a
/// simplex, expressed as polynomials in physical coordinates. Their
/// conditioning does not depend on the shape of the simplex.
struct LocalMonomials {
    dim: usize,
    matrix: DMatrix<f64>,
    offset: DVector<f64>,
}

impl LocalMonomials {
    fn new(simplex: &Simplex) -> Self {
        let dim = simplex.dim();
        let inv = simplex.reference_map().inverse();
        let centre = DVector::from_element(dim, 1.0 / (dim + 1) as f64);
        LocalMonomials { dim, matrix: inv.matrix().clone(), offset: inv.offset() - centre }
    }

    fn of_degrees(&self, lo: u32, hi: u32) -> Vec<MultiPoly> {
        (lo..=hi)
            .flat_map(|k| MultiIndex::all_of_order(self.dim, k))
            .map(|g| MultiPoly::monomial(self.dim, g, 1.0).compose_affine(&self.matrix, &self.offset))
            .collect()
    }
}

fn least_squares(
    f: &dyn SmoothField,
    basis: &[MultiPoly],
    betas: &[MultiIndex],
    simplex: &Simplex,
    quad_degree: u32,
) -> Result<Vec<f64>> {
    let n = basis.len();
    let rule = QuadratureRule::for_degree(simplex.dim(), quad_degree);
    let mut gram = DMatrix::zeros(n, n);
    let mut rhs = DVector::zeros(n);
    let scale = simplex.measure() / QuadratureRule::reference_volume(simplex.dim());
    let mut row = vec![0.0; n];
    for (lambda, w) in rule.barycentric().iter().zip(rule.weights()) {
        let x = simplex.barycentric_point(lambda);
        let x = x.as_slice();
        for beta in betas {
            for (r, b) in row.iter_mut().zip(basis) {
                *r = b.eval_derivative(*beta, x);
            }
            let fv = f.derivative(0, *beta, x);
            for i in 0..n {
                rhs[i] += w * scale * fv * row[i];
                for j in 0..n {
                    gram[(i, j)] += w * scale * row[i] * row[j];
                }
            }
        }
    }
    let rank = numerical_rank(&gram, RANK_TOL);
    if rank < n {
        return Err(Error::RankDeficient { rank, size: n });
    }
    Ok(solve_vector(&gram, &rhs)?.iter().copied().collect())
}

/// Discrete minimax fit by Lawson's iteratively reweighted least squares on
/// a barycentric lattice.
fn lawson(f: &dyn SmoothField, basis: &[MultiPoly], betas: &[MultiIndex], simplex: &Simplex, lattice: usize) -> Result<Vec<f64>> {
    let points = simplex.lattice_points(lattice);
    let rows = points.len() * betas.len();
    let n = basis.len();
    let mut a = DMatrix::zeros(rows, n);
    let mut y = DVector::zeros(rows);
    let mut r = 0;
    for x in &points {
        for beta in betas {
            for (j, b) in basis.iter().enumerate() {
                a[(r, j)] = b.eval_derivative(*beta, x.as_slice());
            }
            y[r] = f.derivative(0, *beta, x.as_slice());
            r += 1;
        }
    }
    let gram = a.transpose() * &a;
    let rank = numerical_rank(&gram, RANK_TOL);
    if rank < n {
        return Err(Error::RankDeficient { rank, size: n });
    }
    let mut w = DVector::from_element(rows, 1.0 / rows as f64);
    let mut best: Option<(f64, DVector<f64>)> = None;
    for _ in 0..LAWSON_ITERATIONS {
        let aw = DMatrix::from_fn(rows, n, |i, j| a[(i, j)] * w[i]);
        let normal = aw.transpose() * &a;
        let rhs = aw.transpose() * &y;
        let Ok(c) = solve_vector(&normal, &rhs) else { break };
        let res = &y - &a * &c;
        let max = res.amax();
        if best.as_ref().is_none_or(|(m, _)| max < *m) {
            best = Some((max, c));
        }
        let total: f64 = w.iter().zip(res.iter()).map(|(wi, ri)| wi * ri.abs()).sum();
        if max <= 1e-14 * y.amax() || total <= 0.0 {
            break;
        }
        for (wi, ri) in w.iter_mut().zip(res.iter()) {
            *wi *= ri.abs() / total;
        }
    }
    Ok(best.map(|(_, c)| c.iter().copied().collect()).unwrap_or_default())
}

/// `π^{k−m} C(d+k−1, k)^{1/2} ((m−k)!)^{1/2} / (⌊(m−k)/d⌋!)^{d/2}`.
pub fn verfurth_bound(d: u32, k: u32, m: u32) -> Result<f64> {
    if d == 0 || k >= m {
        return Err(Error::InvalidParameter(format!("need d ≥ 1 and k < m, got d={d}, k={k}, m={m}")));
    }
    let binom = binomial(d + k - 1, k);
    let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
    let j = m - k;
    Ok(std::f64::consts::PI.powi(-(j as i32)) * binom.sqrt() * fact(j).sqrt() / fact(j / d).powf(d as f64 / 2.0))
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}
