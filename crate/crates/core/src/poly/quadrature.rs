//! Quadrature on the reference simplex `conv{0, e_1, …, e_d}`.
//!
//! Low degrees use small symmetric rules; everything else uses the collapsed
//! (Duffy) product of Gauss–Legendre rules, which is exact to any requested
//! degree.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use nalgebra::DVector;

/// Points are stored in barycentric coordinates `(λ₀, …, λ_d)`; the
/// cartesian reference coordinates are `(λ₁, …, λ_d)`. Weights sum to the
/// reference volume `1/d!`.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    dim: usize,
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
    degree: u32,
}

impl QuadratureRule {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn barycentric(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn reference_volume(dim: usize) -> f64 {
        1.0 / (1..=dim).map(|i| i as f64).product::<f64>()
    }

    /// Shared rule of at least the requested exactness degree.
    pub fn for_degree(dim: usize, degree: u32) -> Arc<QuadratureRule> {
        static CACHE: OnceLock<RwLock<HashMap<(usize, u32), Arc<QuadratureRule>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(rule) = cache.read().unwrap().get(&(dim, degree)) {
            return rule.clone();
        }
        let rule = Arc::new(Self::symmetric(dim, degree).unwrap_or_else(|| Self::collapsed(dim, degree)));
        cache.write().unwrap().insert((dim, degree), rule.clone());
        rule
    }

    /// Tabulated symmetric rules of degree ≤ 2.
    pub fn symmetric(dim: usize, degree: u32) -> Option<QuadratureRule> {
        let vol = Self::reference_volume(dim);
        let (points, weights, exact) = match (dim, degree) {
            (_, 0 | 1) => {
                let c = 1.0 / (dim as f64 + 1.0);
                (vec![vec![c; dim + 1]], vec![vol], 1)
            }
            (1, 2) => {
                let a = 0.5 - 0.5 / 3f64.sqrt();
                (vec![vec![1.0 - a, a], vec![a, 1.0 - a]], vec![0.5, 0.5], 3)
            }
            (2, 2) => {
                let (a, b) = (2.0 / 3.0, 1.0 / 6.0);
                (vec![vec![a, b, b], vec![b, a, b], vec![b, b, a]], vec![vol / 3.0; 3], 2)
            }
            (3, 2) => {
                let a = 0.585_410_196_624_968_5;
                let b = 0.138_196_601_125_010_5;
                let pts = (0..4)
                    .map(|i| (0..4).map(|j| if i == j { a } else { b }).collect())
                    .collect();
                (pts, vec![vol / 4.0; 4], 2)
            }
            _ => return None,
        };
        Some(QuadratureRule { dim, points, weights, degree: exact })
    }

    /// Collapsed-coordinate Gauss–Legendre rule exact for polynomials of
    /// total degree `degree`.
    pub fn collapsed(dim: usize, degree: u32) -> QuadratureRule {
        // the Jacobian adds up to dim-1 powers in the outermost variable
        let n = (degree as usize + dim).div_ceil(2).max(1);
        let (x, w) = gauss_legendre(n);
        let mut points = Vec::new();
        let mut weights = Vec::new();
        match dim {
            1 => {
                for (xi, wi) in x.iter().zip(&w) {
                    points.push(vec![1.0 - xi, *xi]);
                    weights.push(*wi);
                }
            }
            2 => {
                for (u, wu) in x.iter().zip(&w) {
                    for (v, wv) in x.iter().zip(&w) {
                        let px = *u;
                        let py = (1.0 - u) * v;
                        points.push(vec![1.0 - px - py, px, py]);
                        weights.push(wu * wv * (1.0 - u));
                    }
                }
            }
            3 => {
                for (u, wu) in x.iter().zip(&w) {
                    for (v, wv) in x.iter().zip(&w) {
                        for (t, wt) in x.iter().zip(&w) {
                            let px = *u;
                            let py = (1.0 - u) * v;
                            let pz = (1.0 - u) * (1.0 - v) * t;
                            points.push(vec![1.0 - px - py - pz, px, py, pz]);
                            weights.push(wu * wv * wt * (1.0 - u).powi(2) * (1.0 - v));
                        }
                    }
                }
            }
            _ => panic!("unsupported quadrature dimension {dim}"),
        }
        QuadratureRule { dim, points, weights, degree: (2 * n - dim) as u32 }
    }

    /// Integrate over the reference simplex; `f` receives cartesian
    /// reference coordinates.
    pub fn integrate_reference(&self, mut f: impl FnMut(&[f64]) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(p, w)| w * f(&p[1..])).sum()
    }
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        nodes[i] = 0.5 * (1.0 - x);
        weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Integrate `f` over the (possibly embedded) simplex with the given
/// vertices and measure. `f` receives physical coordinates.
pub fn integrate_on(
    rule: &QuadratureRule,
    vertices: &[DVector<f64>],
    measure: f64,
    mut f: impl FnMut(&[f64]) -> f64,
) -> f64 {
    assert_eq!(vertices.len(), rule.dim() + 1, "rule dimension does not match simplex");
    let scale = measure / QuadratureRule::reference_volume(rule.dim());
    let ambient = vertices[0].len();
    let mut x = vec![0.0; ambient];
    let mut sum = 0.0;
    for (lambda, w) in rule.barycentric().iter().zip(rule.weights()) {
        x.iter_mut().for_each(|v| *v = 0.0);
        for (l, v) in lambda.iter().zip(vertices) {
            for k in 0..ambient {
                x[k] += l * v[k];
            }
        }
        sum += w * f(&x);
    }
    sum * scale
}
