use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{AffineMap, Simplex};
use crate::{Error, Result};

/// Relative tolerance for edge-length ties and the half-space test.
const TIE_TOL: f64 = 1e-12;
/// Slack on the shear constraints, relative to `α₁`.
const CONSTRAINT_SLACK: f64 = 2e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SimplexType {
    TypeI,
    TypeII,
}

impl std::fmt::Display for SimplexType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SimplexType::TypeI => "I",
            SimplexType::TypeII => "II",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Shear {
    Planar { s: f64, t: f64 },
    Spatial { s1: f64, t1: f64, s21: f64, s22: f64, t2: f64 },
}

impl Shear {
    /// `Ã₁` (or `Ã₂` when `simplex_type` is Type II).
    pub fn matrix(&self, simplex_type: SimplexType) -> DMatrix<f64> {
        match *self {
            Shear::Planar { s, t } => DMatrix::from_row_slice(2, 2, &[1.0, s, 0.0, t]),
            Shear::Spatial { s1, t1, s21, s22, t2 } => {
                let s1 = if simplex_type == SimplexType::TypeII { -s1 } else { s1 };
                DMatrix::from_row_slice(3, 3, &[1.0, s1, s21, 0.0, t1, s22, 0.0, 0.0, t2])
            }
        }
    }

    /// Product of the diagonal entries of the shear matrix.
    pub fn determinant(&self) -> f64 {
        match *self {
            Shear::Planar { t, .. } => t,
            Shear::Spatial { t1, t2, .. } => t1 * t2,
        }
    }
}

/// Orthogonal map `x ↦ R x + b` taking an input simplex onto its canonical pose.
#[derive(Clone, Debug, PartialEq)]
pub struct RigidMotion {
    pub rotation: DMatrix<f64>,
    pub translation: DVector<f64>,
    /// `det R = −1`.
    pub mirror: bool,
}

impl RigidMotion {
    pub fn apply(&self, p: &[f64]) -> DVector<f64> {
        &self.rotation * DVector::from_column_slice(p) + &self.translation
    }

    pub fn to_affine(&self) -> AffineMap {
        AffineMap::new(self.rotation.clone(), self.translation.clone()).expect("orthogonal matrix")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StandardPosition {
    simplex: Simplex,
    alphas: Vec<f64>,
    shear: Shear,
    simplex_type: SimplexType,
    motion: RigidMotion,
    labels: Vec<usize>,
}

impl StandardPosition {
    /// Standard position for a prescribed labelling: `labels[i]` is the input
    /// vertex that becomes `x_{i+1}`. Only the shear constraints of the
    /// element family are enforced, not the edge-length conditions.
    pub fn from_labeling(input: &Simplex, labels: &[usize], simplex_type: SimplexType) -> Result<Self> {
        let d = input.dim();
        let mut seen = labels.to_vec();
        seen.sort_unstable();
        if seen != (0..=d).collect::<Vec<_>>() {
            return Err(Error::InvalidParameter(format!("labels {labels:?} are not a permutation of 0..={d}")));
        }
        if d == 2 && simplex_type == SimplexType::TypeII {
            return Err(Error::InvalidParameter("planar simplices are always of type I".into()));
        }
        let x: Vec<&DVector<f64>> = labels.iter().map(|&i| input.vertex(i)).collect();
        let a1 = (x[1] - x[0]).norm();
        let e1 = (x[1] - x[0]) / a1;
        let e2 = orthonormal_complement(&(x[2] - x[0]), &[&e1]);
        let mut rows = vec![e1.clone(), e2.clone()];
        let (alphas, shear, canonical) = if d == 2 {
            let v = x[2] - x[0];
            let a2 = v.norm();
            let (s, t) = (e1.dot(&v) / a2, e2.dot(&v) / a2);
            let pts = vec![vec![0.0, 0.0], vec![a1, 0.0], vec![a2 * s, a2 * t]];
            (vec![a1, a2], Shear::Planar { s, t }, pts)
        } else {
            let e3 = orthonormal_complement(&(x[3] - x[0]), &[&e1, &e2]);
            let v = x[2] - x[0];
            let (a2, s1) = match simplex_type {
                SimplexType::TypeI => {
                    let a2 = v.norm();
                    (a2, e1.dot(&v) / a2)
                }
                SimplexType::TypeII => {
                    let w = x[2] - x[1];
                    let a2 = w.norm();
                    (a2, -e1.dot(&w) / a2)
                }
            };
            let t1 = e2.dot(&v) / a2;
            let u = x[3] - x[0];
            let a3 = u.norm();
            let (s21, s22, t2) = (e1.dot(&u) / a3, e2.dot(&u) / a3, e3.dot(&u) / a3);
            let x3 = match simplex_type {
                SimplexType::TypeI => vec![a2 * s1, a2 * t1, 0.0],
                SimplexType::TypeII => vec![a1 - a2 * s1, a2 * t1, 0.0],
            };
            let pts = vec![vec![0.0; 3], vec![a1, 0.0, 0.0], x3, vec![a3 * s21, a3 * s22, a3 * t2]];
            rows.push(e3);
            let shear = Shear::Spatial { s1, t1, s21, s22, t2 };
            check_spatial_constraints(a1, a2, a3, &shear)?;
            (vec![a1, a2, a3], shear, pts)
        };
        let rotation = DMatrix::from_fn(d, d, |r, c| rows[r][c]);
        let translation = -(&rotation * x[0]);
        let mirror = rotation.determinant() < 0.0;
        let simplex = Simplex::from_points(&canonical)?;
        Ok(StandardPosition {
            simplex,
            alphas,
            shear,
            simplex_type,
            motion: RigidMotion { rotation, translation, mirror },
            labels: labels.to_vec(),
        })
    }

    pub fn dim(&self) -> usize {
        self.alphas.len()
    }

    /// The simplex in canonical pose, vertices ordered `x₁, …, x_{d+1}`.
    pub fn simplex(&self) -> &Simplex {
        &self.simplex
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn shear(&self) -> Shear {
        self.shear
    }

    pub fn simplex_type(&self) -> SimplexType {
        self.simplex_type
    }

    pub fn motion(&self) -> &RigidMotion {
        &self.motion
    }

    /// `labels()[i]` is the index in the input simplex of canonical vertex `i`.
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn diag_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(&self.alphas))
    }

    pub fn shear_matrix(&self) -> DMatrix<f64> {
        self.shear.matrix(self.simplex_type)
    }

    /// `T̂` for type I, `T̂₂` for type II.
    pub fn reference_simplex(&self) -> Simplex {
        match self.simplex_type {
            SimplexType::TypeI => Simplex::reference(self.dim()),
            SimplexType::TypeII => Simplex::reference_type2(),
        }
    }

    /// Map from the reference simplex onto the input simplex; reference
    /// vertex `i` goes to input vertex `labels()[i]`.
    pub fn reference_map(&self) -> AffineMap {
        let linear = AffineMap::linear(self.shear_matrix() * self.diag_matrix()).expect("nondegenerate");
        self.motion.to_affine().inverse().compose(&linear)
    }

    /// Whether the labelling obeys the edge-length conditions (longest edge
    /// `x₂x₃` in 2D; `α₂ = |L_min|`, `α₁ = |L_max^(min)|`, `α₃ ≤ 2α₁` in 3D).
    pub fn satisfies_conditions(&self) -> bool {
        let s = &self.simplex;
        let edges = s.edges();
        let longest = edges.last().unwrap().length;
        let tol = TIE_TOL * longest;
        if self.dim() == 2 {
            return s.distance(1, 2) >= longest - tol && self.alphas[1] <= self.alphas[0] + tol;
        }
        let min = edges[0].length;
        let (la, lb) = match self.simplex_type {
            SimplexType::TypeI => (0, 2),
            SimplexType::TypeII => (1, 2),
        };
        if (s.distance(la, lb) - min).abs() > tol || (self.alphas[1] - min).abs() > tol {
            return false;
        }
        let touching = edges
            .iter()
            .filter(|e| (e.a == la || e.a == lb || e.b == la || e.b == lb) && !(e.a.min(e.b) == la.min(lb) && e.a.max(e.b) == la.max(lb)))
            .fold(0.0f64, |m, e| m.max(e.length));
        (self.alphas[0] - touching).abs() <= tol && self.alphas[2] <= 2.0 * self.alphas[0] + tol
    }
}

fn check_spatial_constraints(a1: f64, a2: f64, a3: f64, shear: &Shear) -> Result<()> {
    let Shear::Spatial { s1, t1, s21, t2, .. } = *shear else { unreachable!() };
    let slack = CONSTRAINT_SLACK * a1;
    let problems = [
        (a2 * s1 < -slack, "s₁ < 0"),
        (t1 <= 0.0, "t₁ ≤ 0"),
        (t2 <= 0.0, "t₂ ≤ 0"),
        (a2 * s1 > a1 / 2.0 + slack, "α₂s₁ > α₁/2"),
        (a3 * s21 > a1 / 2.0 + slack, "α₃s₂₁ > α₁/2"),
    ];
    match problems.iter().find(|(bad, _)| *bad) {
        Some((_, what)) => Err(Error::InvalidParameter(format!("shear constraint violated: {what}"))),
        None => Ok(()),
    }
}

fn orthonormal_complement(v: &DVector<f64>, basis: &[&DVector<f64>]) -> DVector<f64> {
    let mut w = v.clone();
    for _ in 0..2 {
        for b in basis {
            let c = b.dot(&w);
            w -= *b * c;
        }
    }
    let n = w.norm();
    w / n
}

/// Standard position with the labelling fixed by the edge-length conditions.
pub fn to_standard_position(s: &Simplex) -> Result<StandardPosition> {
    let (labels, ty) = match s.dim() {
        2 => planar_labels(s),
        _ => spatial_labels(s),
    };
    StandardPosition::from_labeling(s, &labels, ty)
}

fn lex_pair(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Among `pairs`, the extreme edge by length (`longest` or shortest), ties
/// broken by the lexicographically smallest sorted index pair.
fn extreme_edge(s: &Simplex, pairs: &[(usize, usize)], longest: bool) -> (usize, usize) {
    let lengths: Vec<f64> = pairs.iter().map(|&(a, b)| s.distance(a, b)).collect();
    let target = if longest { lengths.iter().copied().fold(f64::MIN, f64::max) } else { lengths.iter().copied().fold(f64::MAX, f64::min) };
    let tol = TIE_TOL * s.diameter();
    pairs
        .iter()
        .zip(&lengths)
        .filter(|(_, l)| (**l - target).abs() <= tol)
        .map(|(p, _)| *p)
        .min_by_key(|&(a, b)| lex_pair(a, b))
        .unwrap()
}

fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect()
}

fn planar_labels(s: &Simplex) -> (Vec<usize>, SimplexType) {
    let (a, b) = extreme_edge(s, &all_pairs(3), true);
    let c = 3 - a - b;
    let (da, db) = (s.distance(c, a), s.distance(c, b));
    let tol = TIE_TOL * s.diameter();
    let (x2, x3) = if (da - db).abs() <= tol || da > db { (a, b) } else { (b, a) };
    (vec![c, x2, x3], SimplexType::TypeI)
}

fn spatial_labels(s: &Simplex) -> (Vec<usize>, SimplexType) {
    let (a, b) = extreme_edge(s, &all_pairs(4), false);
    let others: Vec<usize> = (0..4).filter(|&i| i != a && i != b).collect();
    let touching: Vec<(usize, usize)> = [a, b].iter().flat_map(|&p| others.iter().map(move |&q| (p, q))).collect();
    let (p, q) = extreme_edge(s, &touching, true);
    let r = if p == a { b } else { a };
    let u = if q == others[0] { others[1] } else { others[0] };
    let (xp, xq, xu) = (s.vertex(p), s.vertex(q), s.vertex(u));
    let mid = (xp + xq) / 2.0;
    let dir = xq - xp;
    let side = (xu - mid).dot(&dir);
    if side > TIE_TOL * dir.norm_squared() {
        (vec![q, p, r, u], SimplexType::TypeII)
    } else {
        (vec![p, q, r, u], SimplexType::TypeI)
    }
}

/// Factors `A = Ã Â` of a standard position.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    pub diag: AffineMap,
    pub shear: AffineMap,
    pub simplex_type: SimplexType,
}

impl Decomposition {
    pub fn linear(&self) -> DMatrix<f64> {
        self.shear.matrix() * self.diag.matrix()
    }

    pub fn reference(&self) -> Simplex {
        match self.simplex_type {
            SimplexType::TypeI => Simplex::reference(self.diag.dim()),
            SimplexType::TypeII => Simplex::reference_type2(),
        }
    }

    /// Recover `α` and the shear parameters from the factors.
    pub fn parameters(&self) -> (Vec<f64>, Shear) {
        let a = self.diag.matrix();
        let m = self.shear.matrix();
        let alphas = (0..a.nrows()).map(|i| a[(i, i)]).collect();
        let shear = if m.nrows() == 2 {
            Shear::Planar { s: m[(0, 1)], t: m[(1, 1)] }
        } else {
            let s1 = if self.simplex_type == SimplexType::TypeII { -m[(0, 1)] } else { m[(0, 1)] };
            Shear::Spatial { s1, t1: m[(1, 1)], s21: m[(0, 2)], s22: m[(1, 2)], t2: m[(2, 2)] }
        };
        (alphas, shear)
    }
}

pub fn decompose_affine(sp: &StandardPosition) -> Result<Decomposition> {
    if let Shear::Spatial { .. } = sp.shear {
        let a = &sp.alphas;
        check_spatial_constraints(a[0], a[1], a[2], &sp.shear)?;
    }
    Ok(Decomposition {
        diag: AffineMap::linear(sp.diag_matrix())?,
        shear: AffineMap::linear(sp.shear_matrix())?,
        simplex_type: sp.simplex_type,
    })
}
