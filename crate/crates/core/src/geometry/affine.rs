use nalgebra::{DMatrix, DVector};

use super::simplex::DEGENERACY_TOL;
use crate::{Error, Result};

/// `x ↦ A x + b` with invertible `A`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineMap {
    matrix: DMatrix<f64>,
    offset: DVector<f64>,
}

impl AffineMap {
    pub fn new(matrix: DMatrix<f64>, offset: DVector<f64>) -> Result<Self> {
        let d = matrix.nrows();
        if matrix.ncols() != d || offset.len() != d {
            return Err(Error::InvalidParameter(format!(
                "affine map with {}x{} matrix and offset of length {}",
                d,
                matrix.ncols(),
                offset.len()
            )));
        }
        let det = matrix.determinant();
        let scale = matrix.norm().powi(d as i32).max(f64::MIN_POSITIVE);
        if !det.is_finite() || det.abs() <= DEGENERACY_TOL * scale {
            return Err(Error::Singular(format!("affine matrix has determinant {det:e}")));
        }
        Ok(AffineMap { matrix, offset })
    }

    pub fn linear(matrix: DMatrix<f64>) -> Result<Self> {
        let d = matrix.nrows();
        Self::new(matrix, DVector::zeros(d))
    }

    /// The affine map sending vertex `i` of `from` to vertex `i` of `to`.
    pub fn between(from: &super::Simplex, to: &super::Simplex) -> Result<Self> {
        if from.dim() != to.dim() {
            return Err(Error::InvalidParameter("simplices of different dimension".into()));
        }
        let inv = from.edge_matrix().try_inverse().ok_or_else(|| Error::Singular("degenerate source simplex".into()))?;
        let matrix = to.edge_matrix() * inv;
        let offset = to.vertex(0) - &matrix * from.vertex(0);
        Self::new(matrix, offset)
    }

    pub fn identity(dim: usize) -> Self {
        AffineMap { matrix: DMatrix::identity(dim, dim), offset: DVector::zeros(dim) }
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn offset(&self) -> &DVector<f64> {
        &self.offset
    }

    pub fn determinant(&self) -> f64 {
        self.matrix.determinant()
    }

    pub fn apply(&self, p: &[f64]) -> DVector<f64> {
        &self.matrix * DVector::from_column_slice(p) + &self.offset
    }

    pub fn inverse(&self) -> AffineMap {
        let inv = self.matrix.clone().try_inverse().expect("affine matrix is invertible");
        let offset = -(&inv * &self.offset);
        AffineMap { matrix: inv, offset }
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &AffineMap) -> AffineMap {
        AffineMap { matrix: &self.matrix * &inner.matrix, offset: &self.matrix * &inner.offset + &self.offset }
    }
}
