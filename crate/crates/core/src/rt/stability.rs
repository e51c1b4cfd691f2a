use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::interpolate::RtInterpolator;
use super::space::build_rt_space;
use crate::geometry::{Simplex, SimplexType};
use crate::poly::{
    norm, SmoothField, poly_space_basis, seminorm, Exponent, MultiIndex, MultiPoly, QuadratureRule, SeminormOptions, VectorPoly,
};
use crate::Result;

/// Right-hand side used for the component-wise bound on `‖(I û)_i‖_{L²}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum StabilityEstimate {
    /// `‖û_i‖_{H¹} + ‖div û‖_{L²}`.
    Divergence,
    /// `‖û_i‖_{H¹} + Σ_{j≠i} ‖∂û_j/∂x̂_j‖_{L²}`.
    Diagonal,
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilityReport {
    pub dim: usize,
    pub k: u32,
    pub reference: SimplexType,
    pub estimate: StabilityEstimate,
    pub fields: usize,
    /// Per-component supremum of `‖(I û)_i‖ / rhs_i` over the corpus.
    pub sampled: Vec<f64>,
    /// Per-component supremum after ascent from every corpus field.
    pub sup: Vec<f64>,
}

/// Random vector field with every monomial coefficient uniform in `[−1, 1]`.
pub fn random_vector_field<R: Rng + ?Sized>(rng: &mut R, dim: usize, degree: u32) -> VectorPoly {
    VectorPoly(
        (0..dim)
            .map(|_| {
                let mut p = MultiPoly::zero(dim);
                for m in poly_space_basis(dim, degree) {
                    let beta = *m.terms().next().unwrap().0;
                    p.add_term(beta, rng.gen_range(-1.0..1.0));
                }
                p
            })
            .collect(),
    )
}

fn reference_simplex(dim: usize, reference: SimplexType) -> Simplex {
    match reference {
        SimplexType::TypeI => Simplex::reference(dim),
        SimplexType::TypeII => Simplex::reference_type2(),
    }
}

/// Quadratic forms of the stability ratio on the coefficient space of
/// `(P^q)^d`, with coefficient `j·m + b` belonging to `e_j x^{β_b}`.
struct RatioForms {
    numerators: Vec<DMatrix<f64>>,
    denominators: Vec<Vec<DMatrix<f64>>>,
}

impl RatioForms {
    fn new(interp: &RtInterpolator, t: &Simplex, q: u32, estimate: StabilityEstimate, opts: &SeminormOptions) -> Result<Self> {
        let d = t.dim();
        let betas = MultiIndex::all_up_to(d, q);
        let m = betas.len();
        let n = d * m;
        let rule = QuadratureRule::for_degree(d, 2 * q);
        let scale = t.measure() / QuadratureRule::reference_volume(d);
        let points: Vec<Vec<f64>> = rule
            .barycentric()
            .iter()
            .map(|lambda| t.barycentric_point(lambda).iter().copied().collect())
            .collect();
        let np = points.len();
        let weights = DMatrix::from_diagonal(&DVector::from_iterator(np, rule.weights().iter().map(|w| w * scale)));
        let monomials: Vec<MultiPoly> = betas.iter().map(|b| MultiPoly::monomial(d, *b, 1.0)).collect();
        let values = DMatrix::from_fn(np, m, |p, b| monomials[b].eval(&points[p]));
        let partial = |l: usize| DMatrix::from_fn(np, m, |p, b| monomials[b].eval_derivative(MultiIndex::unit(l), &points[p]));
        let partials: Vec<DMatrix<f64>> = (0..d).map(partial).collect();
        let gram = |v: &DMatrix<f64>| v.transpose() * &weights * v;
        let embed = |block: &DMatrix<f64>, i: usize, j: usize| {
            let mut full = DMatrix::zeros(n, n);
            full.view_mut((i * m, j * m), (m, m)).copy_from(block);
            full
        };

        let mut interpolated = vec![DMatrix::zeros(np, n); d];
        for j in 0..d {
            for (b, mono) in monomials.iter().enumerate() {
                let mut field = VectorPoly::zero(d, d);
                field.0[j] = mono.clone();
                let iu = interp.interpolate(&field, opts)?;
                for (i, target) in interpolated.iter_mut().enumerate() {
                    for (p, x) in points.iter().enumerate() {
                        target[(p, j * m + b)] = iu.value(i, x);
                    }
                }
            }
        }
        let numerators = interpolated.iter().map(gram).collect();

        let h1 = partials.iter().fold(gram(&values), |acc, v| acc + gram(v));
        let diagonal: Vec<DMatrix<f64>> = (0..d).map(|j| embed(&gram(&partials[j]), j, j)).collect();
        let mut divergence = DMatrix::zeros(np, n);
        for j in 0..d {
            divergence.view_mut((0, j * m), (np, m)).copy_from(&partials[j]);
        }
        let divergence = gram(&divergence);
        let denominators = (0..d)
            .map(|i| {
                let mut forms = vec![embed(&h1, i, i)];
                match estimate {
                    StabilityEstimate::Divergence => forms.push(divergence.clone()),
                    StabilityEstimate::Diagonal => forms.extend((0..d).filter(|&j| j != i).map(|j| diagonal[j].clone())),
                }
                forms
            })
            .collect();
        Ok(RatioForms { numerators, denominators })
    }

    fn coefficients(u: &VectorPoly, q: u32) -> DVector<f64> {
        let d = u.dim();
        let betas = MultiIndex::all_up_to(d, q);
        DVector::from_iterator(d * betas.len(), u.0.iter().flat_map(|c| betas.iter().map(move |b| c.coefficient(b))))
    }

    fn ratio(&self, i: usize, c: &DVector<f64>) -> f64 {
        let num = quad(&self.numerators[i], c).sqrt();
        let den: f64 = self.denominators[i].iter().map(|f| quad(f, c).sqrt()).sum();
        if den > 1e-13 * num.max(f64::MIN_POSITIVE) {
            num / den
        } else if num > 0.0 {
            f64::INFINITY
        } else {
            0.0
        }
    }

    /// Gradient ascent on the ratio of component `i` from `c`, returning the
    /// largest value reached.
    fn ascend(&self, i: usize, c: &DVector<f64>, steps: usize) -> f64 {
        let mut c = c.normalize();
        let mut value = self.ratio(i, &c);
        let mut step = 1.0;
        for _ in 0..steps {
            if !value.is_finite() || value == 0.0 {
                break;
            }
            let lc = &self.numerators[i] * &c;
            let num = c.dot(&lc);
            let mut den = 0.0;
            let mut dgrad = DVector::zeros(c.len());
            for f in &self.denominators[i] {
                let fc = f * &c;
                let r = c.dot(&fc).sqrt();
                den += r;
                if r > 0.0 {
                    dgrad += fc / r;
                }
            }
            let grad = lc / num - dgrad / den;
            let gnorm = grad.norm();
            if gnorm < 1e-12 {
                break;
            }
            let direction = grad / gnorm;
            let mut improved = false;
            while step > 1e-10 {
                let trial = (&c + &direction * step).normalize();
                let v = self.ratio(i, &trial);
                if v > value {
                    improved = v > value * (1.0 + 1e-12);
                    c = trial;
                    value = v;
                    step = (step * 2.0).min(1.0);
                    break;
                }
                step *= 0.5;
            }
            if !improved {
                break;
            }
        }
        value
    }
}

fn quad(form: &DMatrix<f64>, c: &DVector<f64>) -> f64 {
    c.dot(&(form * c)).max(0.0)
}

const ASCENT_STEPS: usize = 60;

/// Component-wise stability suprema of `I^{RT}` on a reference simplex.
///
/// The corpus holds seeded random polynomial fields of degree `k + 2`; a
/// larger corpus with the same seed extends the smaller one. `sampled` is
/// the plain supremum over the corpus, `sup` the supremum after refining
/// every corpus field by gradient ascent on the ratio.
pub fn component_stability(
    dim: usize,
    k: u32,
    reference: SimplexType,
    estimate: StabilityEstimate,
    fields: usize,
    seed: u64,
    opts: &SeminormOptions,
) -> Result<StabilityReport> {
    let t = reference_simplex(dim, reference);
    let space = build_rt_space(dim, k)?;
    let interp = RtInterpolator::new(&space, &t)?;
    let q = k + 2;
    let forms = RatioForms::new(&interp, &t, q, estimate, opts)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let corpus: Vec<DVector<f64>> =
        (0..fields).map(|_| RatioForms::coefficients(&random_vector_field(&mut rng, dim, q), q)).collect();
    let per_field: Vec<Vec<(f64, f64)>> = corpus
        .par_iter()
        .map(|c| (0..dim).map(|i| (forms.ratio(i, c), forms.ascend(i, c, ASCENT_STEPS))).collect())
        .collect();
    let mut sampled = vec![0.0f64; dim];
    let mut sup = vec![0.0f64; dim];
    for ratios in &per_field {
        for (i, (raw, refined)) in ratios.iter().enumerate() {
            sampled[i] = sampled[i].max(*raw);
            sup[i] = sup[i].max(refined.max(*raw));
        }
    }
    Ok(StabilityReport { dim, k, reference, estimate, fields, sampled, sup })
}

/// `‖(I û)_i‖ / rhs_i` for each component `i`.
pub fn stability_ratios(
    interp: &RtInterpolator,
    u: &VectorPoly,
    t: &Simplex,
    estimate: StabilityEstimate,
    opts: &SeminormOptions,
) -> Result<Vec<f64>> {
    let d = t.dim();
    let iu = interp.interpolate(u, opts)?.to_physical();
    let div = seminorm(&u.divergence(), t, 0, Exponent::Two, opts)?;
    let partials = (0..d)
        .map(|j| seminorm(&u.0[j].derivative(MultiIndex::unit(j)), t, 0, Exponent::Two, opts))
        .collect::<Result<Vec<_>>>()?;
    (0..d)
        .map(|i| {
            let lhs = seminorm(&iu.0[i], t, 0, Exponent::Two, opts)?;
            let extra = match estimate {
                StabilityEstimate::Divergence => div,
                StabilityEstimate::Diagonal => (0..d).filter(|&j| j != i).map(|j| partials[j]).sum(),
            };
            let rhs = norm(&u.0[i], t, 1, Exponent::Two, opts)? + extra;
            Ok(if rhs > 0.0 { lhs / rhs } else if lhs > 0.0 { f64::INFINITY } else { 0.0 })
        })
        .collect()
}

/// Stability suprema for `base` and `2·base` fields and the largest relative
/// change between them.
pub fn component_stability_doubling(
    dim: usize,
    k: u32,
    reference: SimplexType,
    estimate: StabilityEstimate,
    base: usize,
    seed: u64,
    opts: &SeminormOptions,
) -> Result<(StabilityReport, StabilityReport, f64)> {
    let small = component_stability(dim, k, reference, estimate, base, seed, opts)?;
    let large = component_stability(dim, k, reference, estimate, 2 * base, seed, opts)?;
    let change = small.sup.iter().zip(&large.sup).map(|(a, b)| (b - a).abs() / b.max(f64::MIN_POSITIVE)).fold(0.0, f64::max);
    Ok((small, large, change))
}
