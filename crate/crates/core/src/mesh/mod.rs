//! Conforming simplicial meshes, anisotropic family generators and the
//! `anisomesh` text format.

mod conformity;
mod family;
mod format;

use std::collections::HashMap;

use crate::geometry::Simplex;
use crate::shape::param_h_t0;
use crate::{Error, Result};

pub use conformity::{conformity_check, ConformityReport, Violation};
pub use family::{generate_family, refine_uniform, FamilyKind, FamilySpec, Seed};
pub use format::{parse_mesh, read_mesh, render_mesh, write_mesh, LoadedMesh};

/// A simplicial mesh: vertex coordinates and cells as `(d+1)`-tuples of
/// vertex indices.
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    dim: usize,
    vertices: Vec<Vec<f64>>,
    cells: Vec<Vec<usize>>,
}

impl Mesh {
    /// Validates indices, rejects duplicate and degenerate cells.
    pub fn new(dim: usize, vertices: Vec<Vec<f64>>, cells: Vec<Vec<usize>>) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::InvalidParameter(format!("mesh dimension {dim} not supported")));
        }
        if let Some(v) = vertices.iter().find(|v| v.len() != dim) {
            return Err(Error::InvalidParameter(format!("vertex with {} coordinates in a {dim}-d mesh", v.len())));
        }
        let mut seen = HashMap::new();
        for (i, cell) in cells.iter().enumerate() {
            if cell.len() != dim + 1 {
                return Err(Error::InvalidParameter(format!("cell {i} has {} vertices, expected {}", cell.len(), dim + 1)));
            }
            if let Some(&index) = cell.iter().find(|&&v| v >= vertices.len()) {
                return Err(Error::IndexOutOfRange { index, count: vertices.len() });
            }
            let mut key = cell.clone();
            key.sort_unstable();
            if key.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Degenerate(format!("cell {i} repeats a vertex")));
            }
            if seen.insert(key, i).is_some() {
                return Err(Error::DuplicateCell(i));
            }
        }
        let mesh = Mesh { dim, vertices, cells };
        for i in 0..mesh.cells.len() {
            Simplex::from_points(&mesh.cell_points(i)).map_err(|e| Error::Degenerate(format!("cell {i}: {e}")))?;
        }
        Ok(mesh)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    fn cell_points(&self, i: usize) -> Vec<&[f64]> {
        self.cells[i].iter().map(|&v| self.vertices[v].as_slice()).collect()
    }

    pub fn simplex(&self, i: usize) -> Simplex {
        Simplex::from_points(&self.cell_points(i)).expect("cells are validated on construction")
    }

    pub fn simplices(&self) -> impl Iterator<Item = Simplex> + '_ {
        (0..self.cells.len()).map(|i| self.simplex(i))
    }

    /// Largest cell diameter.
    pub fn h(&self) -> f64 {
        self.simplices().map(|s| s.diameter()).fold(0.0, f64::max)
    }

    /// `H(h) = max_T H_{T0}`.
    pub fn big_h(&self) -> Result<f64> {
        self.simplices().map(|s| param_h_t0(&s)).reduce(f64::max).ok_or(Error::EmptyMesh)
    }
}
