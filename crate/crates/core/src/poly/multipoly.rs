use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};

/// Exponent vector `β = (β₁, …, β_d)` for `d ≤ 3`; unused trailing entries
/// are zero.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(pub [u32; 3]);

impl MultiIndex {
    pub const ZERO: MultiIndex = MultiIndex([0; 3]);

    pub fn new(exponents: &[u32]) -> Self {
        assert!(exponents.len() <= 3, "multi-indices support at most 3 variables");
        let mut e = [0; 3];
        e[..exponents.len()].copy_from_slice(exponents);
        MultiIndex(e)
    }

    pub fn unit(i: usize) -> Self {
        let mut e = [0; 3];
        e[i] = 1;
        MultiIndex(e)
    }

    /// `|β|`
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn get(&self, i: usize) -> u32 {
        self.0[i]
    }

    pub fn plus(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex([self.0[0] + other.0[0], self.0[1] + other.0[1], self.0[2] + other.0[2]])
    }

    /// `β!`
    pub fn factorial(&self) -> f64 {
        self.0.iter().map(|&e| (1..=e).map(f64::from).product::<f64>()).product()
    }

    /// All multi-indices in `dim` variables with `|β| = order`, in
    /// reverse-lexicographic order (`x^order` first).
    pub fn all_of_order(dim: usize, order: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        match dim {
            1 => out.push(MultiIndex::new(&[order])),
            2 => {
                for a in (0..=order).rev() {
                    out.push(MultiIndex::new(&[a, order - a]));
                }
            }
            3 => {
                for a in (0..=order).rev() {
                    for b in (0..=order - a).rev() {
                        out.push(MultiIndex::new(&[a, b, order - a - b]));
                    }
                }
            }
            _ => panic!("unsupported dimension {dim}"),
        }
        out
    }

    /// All multi-indices with `|β| ≤ order`, graded.
    pub fn all_up_to(dim: usize, order: u32) -> Vec<MultiIndex> {
        (0..=order).flat_map(|j| Self::all_of_order(dim, j)).collect()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.0[0], self.0[1], self.0[2])
    }
}

/// Real polynomial in `dim ≤ 3` variables with sparse monomial coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiPoly {
    dim: usize,
    terms: BTreeMap<MultiIndex, f64>,
}

impl MultiPoly {
    pub fn zero(dim: usize) -> Self {
        assert!((1..=3).contains(&dim), "unsupported dimension {dim}");
        MultiPoly { dim, terms: BTreeMap::new() }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        Self::monomial(dim, MultiIndex::ZERO, c)
    }

    pub fn monomial(dim: usize, exponents: MultiIndex, coeff: f64) -> Self {
        let mut p = Self::zero(dim);
        debug_assert!(exponents.0[dim..].iter().all(|&e| e == 0));
        if coeff != 0.0 {
            p.terms.insert(exponents, coeff);
        }
        p
    }

    /// The coordinate function `x_i`.
    pub fn variable(dim: usize, i: usize) -> Self {
        Self::monomial(dim, MultiIndex::unit(i), 1.0)
    }

    /// Affine polynomial `c + Σ a_i x_i`.
    pub fn affine(c: f64, a: &[f64]) -> Self {
        let mut p = Self::constant(a.len(), c);
        for (i, &ai) in a.iter().enumerate() {
            p.add_term(MultiIndex::unit(i), ai);
        }
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &f64)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, exponents: &MultiIndex) -> f64 {
        self.terms.get(exponents).copied().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest `|β|` with a nonzero coefficient; `0` for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(MultiIndex::order).max().unwrap_or(0)
    }

    pub fn add_term(&mut self, exponents: MultiIndex, coeff: f64) {
        if coeff == 0.0 {
            return;
        }
        let entry = self.terms.entry(exponents).or_insert(0.0);
        *entry += coeff;
        if *entry == 0.0 {
            self.terms.remove(&exponents);
        }
    }

    /// Drop coefficients with magnitude below `tol`.
    pub fn pruned(mut self, tol: f64) -> Self {
        self.terms.retain(|_, c| c.abs() > tol);
        self
    }

    pub fn scaled(&self, s: f64) -> Self {
        if s == 0.0 {
            return Self::zero(self.dim);
        }
        MultiPoly { dim: self.dim, terms: self.terms.iter().map(|(k, c)| (*k, c * s)).collect() }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.eval_derivative(MultiIndex::ZERO, x)
    }

    /// `∂^β p (x)` without materialising the derivative polynomial.
    pub fn eval_derivative(&self, beta: MultiIndex, x: &[f64]) -> f64 {
        let mut sum = 0.0;
        'terms: for (e, c) in &self.terms {
            let mut v = *c;
            for i in 0..self.dim {
                let (ei, bi) = (e.0[i], beta.0[i]);
                if bi > ei {
                    continue 'terms;
                }
                for j in 0..bi {
                    v *= f64::from(ei - j);
                }
                v *= x[i].powi((ei - bi) as i32);
            }
            sum += v;
        }
        sum
    }

    /// The polynomial `∂^β p`.
    pub fn derivative(&self, beta: MultiIndex) -> Self {
        let mut out = Self::zero(self.dim);
        'terms: for (e, c) in &self.terms {
            let mut v = *c;
            let mut ne = [0u32; 3];
            for i in 0..3 {
                if beta.0[i] > e.0[i] {
                    continue 'terms;
                }
                for j in 0..beta.0[i] {
                    v *= f64::from(e.0[i] - j);
                }
                ne[i] = e.0[i] - beta.0[i];
            }
            out.add_term(MultiIndex(ne), v);
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::constant(self.dim, 1.0);
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    /// `q(x) = p(M x + c)`, a polynomial in `M.ncols()` variables.
    pub fn compose_affine(&self, matrix: &DMatrix<f64>, offset: &DVector<f64>) -> Self {
        assert_eq!(matrix.nrows(), self.dim);
        assert_eq!(offset.len(), self.dim);
        let new_dim = matrix.ncols();
        let linear: Vec<MultiPoly> = (0..self.dim)
            .map(|i| {
                let row: Vec<f64> = (0..new_dim).map(|j| matrix[(i, j)]).collect();
                MultiPoly::affine(offset[i], &row)
            })
            .collect();
        let max_deg = self.terms.keys().map(|e| *e.0.iter().max().unwrap()).max().unwrap_or(0);
        // powers[i][n] = linear[i]^n
        let powers: Vec<Vec<MultiPoly>> = linear
            .iter()
            .map(|l| {
                let mut v = vec![MultiPoly::constant(new_dim, 1.0)];
                for n in 1..=max_deg as usize {
                    let next = &v[n - 1] * l;
                    v.push(next);
                }
                v
            })
            .collect();
        let mut out = MultiPoly::zero(new_dim);
        for (e, c) in &self.terms {
            let mut term = MultiPoly::constant(new_dim, *c);
            for i in 0..self.dim {
                if e.0[i] > 0 {
                    term = &term * &powers[i][e.0[i] as usize];
                }
            }
            out = &out + &term;
        }
        out
    }

    /// Largest absolute coefficient.
    pub fn max_coefficient(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }
}

impl Add for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        assert_eq!(self.dim, rhs.dim);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, *c);
        }
        out
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        assert_eq!(self.dim, rhs.dim);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, -c);
        }
        out
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        assert_eq!(self.dim, rhs.dim);
        let mut out = MultiPoly::zero(self.dim);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                out.add_term(ea.plus(eb), ca * cb);
            }
        }
        out
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        self.scaled(-1.0)
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let names = ["x", "y", "z"];
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for i in 0..self.dim {
                match e.0[i] {
                    0 => {}
                    1 => write!(f, "*{}", names[i])?,
                    n => write!(f, "*{}^{}", names[i], n)?,
                }
            }
        }
        Ok(())
    }
}

/// Vector-valued polynomial, one [`MultiPoly`] per component.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorPoly(pub Vec<MultiPoly>);

impl VectorPoly {
    pub fn zero(dim: usize, components: usize) -> Self {
        VectorPoly(vec![MultiPoly::zero(dim); components])
    }

    pub fn dim(&self) -> usize {
        self.0[0].dim()
    }

    pub fn components(&self) -> usize {
        self.0.len()
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.0.iter().map(|p| p.eval(x)).collect()
    }

    pub fn divergence(&self) -> MultiPoly {
        let mut out = MultiPoly::zero(self.dim());
        for (i, p) in self.0.iter().enumerate() {
            out = &out + &p.derivative(MultiIndex::unit(i));
        }
        out
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(MultiPoly::degree).max().unwrap_or(0)
    }

    pub fn scaled(&self, s: f64) -> Self {
        VectorPoly(self.0.iter().map(|p| p.scaled(s)).collect())
    }

    pub fn add(&self, other: &VectorPoly) -> Self {
        VectorPoly(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &VectorPoly) -> Self {
        VectorPoly(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    /// `w(x) = M v(B x + c)`: mixes components with `mix` and substitutes an
    /// affine change of variables in every component.
    pub fn transform(&self, mix: &DMatrix<f64>, matrix: &DMatrix<f64>, offset: &DVector<f64>) -> Self {
        let composed: Vec<MultiPoly> = self.0.iter().map(|p| p.compose_affine(matrix, offset)).collect();
        let new_dim = matrix.ncols();
        let comps = (0..mix.nrows())
            .map(|i| {
                composed.iter().enumerate().fold(MultiPoly::zero(new_dim), |acc, (j, p)| {
                    &acc + &p.scaled(mix[(i, j)])
                })
            })
            .collect();
        VectorPoly(comps)
    }
}

/// Monomial basis of `P^k` in `dim` variables, graded by degree.
pub fn poly_space_basis(dim: usize, k: u32) -> Vec<MultiPoly> {
    MultiIndex::all_up_to(dim, k).into_iter().map(|e| MultiPoly::monomial(dim, e, 1.0)).collect()
}
