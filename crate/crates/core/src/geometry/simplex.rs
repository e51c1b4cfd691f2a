use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::AffineMap;
use crate::{Error, Result};

pub type Point = DVector<f64>;

/// A simplex is degenerate if `|T| < DEGENERACY_TOL · h_T^d`.
pub const DEGENERACY_TOL: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq)]
pub struct Simplex {
    vertices: Vec<Point>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub length: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Facet {
    /// Index of the vertex not on the facet.
    pub opposite: usize,
    /// Vertex indices in ascending order.
    pub indices: Vec<usize>,
    pub vertices: Vec<Point>,
    pub measure: f64,
    pub normal: Point,
}

impl Simplex {
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        let n = vertices.len();
        if !(3..=4).contains(&n) {
            return Err(Error::InvalidSimplex(format!("expected 3 or 4 vertices, got {n}")));
        }
        let dim = n - 1;
        if let Some(v) = vertices.iter().find(|v| v.len() != dim) {
            return Err(Error::InvalidSimplex(format!("vertex of dimension {} in a {dim}-simplex", v.len())));
        }
        if vertices.iter().any(|v| v.iter().any(|c| !c.is_finite())) {
            return Err(Error::InvalidSimplex("non-finite coordinate".into()));
        }
        let s = Simplex { vertices };
        let h = s.diameter();
        let vol = s.measure();
        if !(vol >= DEGENERACY_TOL * h.powi(dim as i32)) || h == 0.0 {
            return Err(Error::Degenerate(format!("volume {vol:e} for diameter {h:e}")));
        }
        Ok(s)
    }

    pub fn from_points<P: AsRef<[f64]>>(points: &[P]) -> Result<Self> {
        Self::new(points.iter().map(|p| DVector::from_column_slice(p.as_ref())).collect())
    }

    /// `conv{0, e₁, …, e_d}`.
    pub fn reference(dim: usize) -> Self {
        let mut v = vec![DVector::zeros(dim)];
        for i in 0..dim {
            let mut e = DVector::zeros(dim);
            e[i] = 1.0;
            v.push(e);
        }
        Simplex { vertices: v }
    }

    /// `conv{0, e₁, e₁ + e₂, e₃}`.
    pub fn reference_type2() -> Self {
        Simplex::from_points(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 1.0]]).unwrap()
    }

    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> &Point {
        &self.vertices[i]
    }

    /// Columns `x_i − x_0`.
    pub fn edge_matrix(&self) -> DMatrix<f64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |r, c| self.vertices[c + 1][r] - self.vertices[0][r])
    }

    pub fn signed_volume(&self) -> f64 {
        let d = self.dim();
        self.edge_matrix().determinant() / if d == 2 { 2.0 } else { 6.0 }
    }

    pub fn measure(&self) -> f64 {
        self.signed_volume().abs()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        (&self.vertices[i] - &self.vertices[j]).norm()
    }

    /// All edges sorted by ascending length; equal lengths keep index order.
    pub fn edges(&self) -> Vec<Edge> {
        let n = self.vertices.len();
        let mut edges = Vec::with_capacity(n * (n - 1) / 2);
        for a in 0..n {
            for b in a + 1..n {
                edges.push(Edge { a, b, length: self.distance(a, b) });
            }
        }
        edges.sort_by(|x, y| x.length.total_cmp(&y.length));
        edges
    }

    pub fn diameter(&self) -> f64 {
        let n = self.vertices.len();
        let mut h: f64 = 0.0;
        for a in 0..n {
            for b in a + 1..n {
                h = h.max(self.distance(a, b));
            }
        }
        h
    }

    pub fn centroid(&self) -> Point {
        self.vertices.iter().fold(DVector::zeros(self.dim()), |acc, v| acc + v) / self.vertices.len() as f64
    }

    /// `x̂ ↦ x_0 + E x̂` with `E` the edge matrix.
    pub fn reference_map(&self) -> AffineMap {
        AffineMap::new(self.edge_matrix(), self.vertices[0].clone()).expect("nondegenerate simplex")
    }

    pub fn barycentric_point(&self, lambda: &[f64]) -> Point {
        lambda.iter().zip(&self.vertices).fold(DVector::zeros(self.dim()), |acc, (l, v)| acc + v * *l)
    }

    pub fn barycentric_coordinates(&self, x: &[f64]) -> Vec<f64> {
        let e = self.edge_matrix();
        let rhs = DVector::from_column_slice(x) - &self.vertices[0];
        let mu = e.lu().solve(&rhs).expect("nondegenerate simplex");
        let mut lambda = vec![1.0 - mu.sum()];
        lambda.extend(mu.iter());
        lambda
    }

    /// Points of the barycentric lattice with `n` subdivisions per edge.
    pub fn lattice_points(&self, n: usize) -> Vec<Point> {
        let n = n.max(1);
        barycentric_lattice(self.dim(), n)
            .into_iter()
            .map(|l| {
                let lambda: Vec<f64> = l.iter().map(|&k| k as f64 / n as f64).collect();
                self.barycentric_point(&lambda)
            })
            .collect()
    }

    /// Facets ordered by the index of the opposite vertex.
    pub fn facets(&self) -> Vec<Facet> {
        let n = self.vertices.len();
        let centroid = self.centroid();
        (0..n)
            .map(|opposite| {
                let indices: Vec<usize> = (0..n).filter(|&i| i != opposite).collect();
                let vertices: Vec<Point> = indices.iter().map(|&i| self.vertices[i].clone()).collect();
                let measure = embedded_measure(&vertices);
                let mut normal = facet_normal(&vertices);
                if normal.dot(&(&vertices[0] - &centroid)) < 0.0 {
                    normal = -normal;
                }
                Facet { opposite, indices, vertices, measure, normal }
            })
            .collect()
    }

    pub fn transformed(&self, map: &AffineMap) -> Result<Simplex> {
        Simplex::new(self.vertices.iter().map(|v| map.apply(v.as_slice())).collect())
    }
}

fn facet_normal(vertices: &[Point]) -> Point {
    let n = match vertices.len() {
        2 => {
            let t = &vertices[1] - &vertices[0];
            DVector::from_column_slice(&[t[1], -t[0]])
        }
        3 => {
            let a = nalgebra::Vector3::new(
                vertices[1][0] - vertices[0][0],
                vertices[1][1] - vertices[0][1],
                vertices[1][2] - vertices[0][2],
            );
            let b = nalgebra::Vector3::new(
                vertices[2][0] - vertices[0][0],
                vertices[2][1] - vertices[0][1],
                vertices[2][2] - vertices[0][2],
            );
            let c = a.cross(&b);
            DVector::from_column_slice(c.as_slice())
        }
        k => panic!("facet with {k} vertices"),
    };
    let len = n.norm();
    n / len
}

/// `k`-dimensional measure of a `k`-simplex embedded in `R^n`, from the
/// Gram determinant of its edge vectors.
pub fn embedded_measure(vertices: &[Point]) -> f64 {
    let k = vertices.len() - 1;
    if k == 0 {
        return 1.0;
    }
    let e = DMatrix::from_fn(vertices[0].len(), k, |r, c| vertices[c + 1][r] - vertices[0][r]);
    let gram = e.transpose() * &e;
    let fact: f64 = (1..=k).map(|i| i as f64).product();
    gram.determinant().max(0.0).sqrt() / fact
}

/// Integer barycentric coordinates `(k_0, …, k_d)` with `Σ k_i = n`.
pub fn barycentric_lattice(dim: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0; dim + 1];
    fill(&mut out, &mut cur, 1, n);
    out
}

fn fill(out: &mut Vec<Vec<usize>>, cur: &mut Vec<usize>, pos: usize, remaining: usize) {
    if pos == cur.len() {
        cur[0] = remaining;
        out.push(cur.clone());
        return;
    }
    for k in 0..=remaining {
        cur[pos] = k;
        fill(out, cur, pos + 1, remaining - k);
    }
}
