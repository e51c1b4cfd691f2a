//! Small dense linear algebra used throughout the crate.
//!
//! Matrices here are at most a few hundred rows (RT degrees of freedom,
//! Vandermonde systems) or exactly 2×2 / 3×3 (Jacobians), so everything is
//! direct.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// Condition number above which solves log a warning.
pub const CONDITION_WARNING: f64 = 1e12;

/// Eigenvalues of a symmetric 2×2 or 3×3 matrix, ascending, by closed form.
///
/// The 3×3 case uses the trigonometric solution of the characteristic cubic.
pub fn sym_eigenvalues(g: &DMatrix<f64>) -> Vec<f64> {
    assert!(g.is_square(), "eigenvalues of a non-square matrix");
    match g.nrows() {
        1 => vec![g[(0, 0)]],
        2 => {
            let (a, b, d) = (g[(0, 0)], g[(0, 1)], g[(1, 1)]);
            let mean = 0.5 * (a + d);
            let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
            let hi = mean + rad;
            // det / hi avoids cancellation in mean - rad
            let det = a * d - b * b;
            let lo = if hi != 0.0 { det / hi } else { mean - rad };
            vec![lo.min(hi), hi.max(lo)]
        }
        3 => {
            let p1 = g[(0, 1)].powi(2) + g[(0, 2)].powi(2) + g[(1, 2)].powi(2);
            let q = (g[(0, 0)] + g[(1, 1)] + g[(2, 2)]) / 3.0;
            if p1 == 0.0 {
                let mut ev = vec![g[(0, 0)], g[(1, 1)], g[(2, 2)]];
                ev.sort_by(f64::total_cmp);
                return ev;
            }
            let p2 = (g[(0, 0)] - q).powi(2)
                + (g[(1, 1)] - q).powi(2)
                + (g[(2, 2)] - q).powi(2)
                + 2.0 * p1;
            let p = (p2 / 6.0).sqrt();
            let b = (g - DMatrix::identity(3, 3) * q) / p;
            let r = (b.determinant() / 2.0).clamp(-1.0, 1.0);
            let phi = r.acos() / 3.0;
            let hi = q + 2.0 * p * phi.cos();
            let lo = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
            let mid = 3.0 * q - hi - lo;
            let mut ev = vec![lo, mid, hi];
            ev.sort_by(f64::total_cmp);
            ev
        }
        n => panic!("closed-form eigenvalues only for n <= 3, got {n}"),
    }
}

/// Spectral norm `sqrt(λ_max(AᵀA))` of a 2×2 or 3×3 matrix.
pub fn spectral_norm(a: &DMatrix<f64>) -> f64 {
    let gram = a.transpose() * a;
    sym_eigenvalues(&gram).last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// `‖A‖₂ ‖A⁻¹‖₂`, with the inverse norm taken from the Gram matrix of the
/// explicit inverse so that nearly singular matrices keep full relative
/// accuracy.
pub fn spectral_condition(a: &DMatrix<f64>) -> Result<f64> {
    let inv = a
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular("matrix has no inverse".into()))?;
    Ok(spectral_norm(a) * spectral_norm(&inv))
}

/// Solve `A X = B` with row equilibration and full pivoting.
///
/// Fails if the matrix is numerically singular.
pub fn solve(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    assert_eq!(a.nrows(), b.nrows());
    let n = a.nrows();
    let mut a = a.clone();
    let mut b = b.clone();
    for i in 0..n {
        let scale = a.row(i).amax();
        if scale == 0.0 {
            return Err(Error::Singular(format!("row {i} is identically zero")));
        }
        a.row_mut(i).scale_mut(1.0 / scale);
        b.row_mut(i).scale_mut(1.0 / scale);
    }
    let lu = a.clone().full_piv_lu();
    let x = lu
        .solve(&b)
        .ok_or_else(|| Error::Singular(format!("{n}x{n} system is singular")))?;
    if log::log_enabled!(log::Level::Warn) {
        let cond = condition_number(&a);
        if cond > CONDITION_WARNING {
            log::warn!("solving {n}x{n} system with condition number {cond:.3e}");
        }
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular(format!("{n}x{n} system produced non-finite values")));
    }
    Ok(x)
}

pub fn solve_vector(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let rhs = DMatrix::from_column_slice(b.len(), 1, b.as_slice());
    let x = solve(a, &rhs)?;
    Ok(DVector::from_column_slice(x.as_slice()))
}

/// 2-norm condition number from the singular values.
pub fn condition_number(a: &DMatrix<f64>) -> f64 {
    let sv = a.singular_values();
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Numerical rank of a symmetric positive semidefinite matrix.
pub fn numerical_rank(gram: &DMatrix<f64>, rel_tol: f64) -> usize {
    let ev = gram.clone().symmetric_eigenvalues();
    let max = ev.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    ev.iter().filter(|v| **v > rel_tol * max).count()
}
