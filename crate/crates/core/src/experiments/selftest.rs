use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::convergence::{run_convergence, ConvergenceConfig, ElementFamily, DEFAULT_ORDER_TOL, DEFAULT_STABILITY_TOL};
use crate::geometry::{decompose_affine, random_simplex, to_standard_position, AffineMap, Shear, Simplex, SimplexType};
use crate::interp::{commuting_check, optimality_check, ElementKind, FiniteElement};
use crate::linalg::{spectral_condition, spectral_norm};
use crate::mesh::{conformity_check, generate_family, parse_mesh, render_mesh, FamilySpec, Mesh};
use crate::poly::{
    best_poly_approx, poly_space_basis, seminorm, Difference, verfurth_bound, ApproxNorm, Exponent, MultiPoly, QuadratureRule,
    SeminormOptions, SmoothField, VectorPoly,
};
use crate::rt::{
    build_rt_space, component_stability, piola_identities, random_vector_field, rt_commuting_check, rt_dimension,
    rt_interpolate, PiolaMap, RtInterpolant, StabilityEstimate,
};
use crate::shape::{equivalence_check, le_with_slack, param_h_t, DEFAULT_SLACK};
use crate::Result;

/// Names a suite to fail on purpose; used to test the failure path.
pub const FAULT_ENV: &str = "ANISOFEM_SELFTEST_FAULT";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub passed: usize,
    pub failed: usize,
    pub suites: Vec<SuiteResult>,
}

impl SelftestReport {
    pub fn pass(&self) -> bool {
        self.failed == 0
    }

    pub fn failed_names(&self) -> Vec<&str> {
        self.suites.iter().filter(|s| !s.pass).map(|s| s.name.as_str()).collect()
    }
}

type Suite = fn(u64, &SeminormOptions) -> Result<(bool, String)>;

pub const SUITES: [(&str, Suite); 16] = [
    ("quadrature-exactness", quadrature_exactness),
    ("standard-position", standard_position),
    ("shear-bounds", shear_bounds),
    ("shape-equivalence", shape_equivalence),
    ("closed-form-ratios", closed_form_ratios),
    ("scalar-commuting", scalar_commuting),
    ("optimality", optimality),
    ("verfurth-constant", verfurth_constant),
    ("rt-dimension", rt_dimension_suite),
    ("rt-projection", rt_projection),
    ("piola-identities", piola_suite),
    ("rt-commuting", rt_commuting),
    ("component-stability", stability),
    ("mesh-conformity", mesh_conformity),
    ("anisomesh-roundtrip", mesh_roundtrip),
    ("p1-convergence-order", p1_order),
];

/// Runs every suite with the given seed. The suite named in `fault`, if any,
/// is reported as failed.
pub fn run_selftest(seed: u64, fault: Option<&str>, opts: &SeminormOptions) -> SelftestReport {
    let suites: Vec<SuiteResult> = SUITES
        .iter()
        .map(|(name, suite)| {
            let (pass, detail) = if fault == Some(*name) {
                (false, "injected fault".to_string())
            } else {
                match suite(seed, opts) {
                    Ok(r) => r,
                    Err(e) => (false, format!("error: {e}")),
                }
            };
            SuiteResult { name: name.to_string(), pass, detail }
        })
        .collect();
    let passed = suites.iter().filter(|s| s.pass).count();
    SelftestReport { seed, passed, failed: suites.len() - passed, suites }
}

fn rng(seed: u64, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

fn population(seed: u64, salt: u64, dim: usize, n: usize) -> Vec<Simplex> {
    let mut r = rng(seed, salt);
    (0..n).map(|_| random_simplex(&mut r, dim, 4.0)).collect()
}

fn quadrature_exactness(_seed: u64, _opts: &SeminormOptions) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for dim in 1..=3usize {
        for degree in 0..=12u32 {
            let rule = QuadratureRule::for_degree(dim, degree);
            for q in poly_space_basis(dim, degree) {
                let (beta, _) = q.terms().next().unwrap();
                // ∫ x^β over the unit simplex is β! / (d + |β|)!
                let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
                let exact = beta.factorial() / fact(dim as u32 + beta.order());
                let got = rule.integrate_reference(|x| q.eval(x));
                worst = worst.max((got - exact).abs() / exact);
            }
        }
    }
    Ok((worst < 1e-12, format!("max relative error {worst:.2e}")))
}

fn standard_position(seed: u64, _opts: &SeminormOptions) -> Result<(bool, String)> {
    let mut ok = 0;
    let mut total = 0;
    for dim in [2, 3] {
        for s in population(seed, 1, dim, 500) {
            total += 1;
            let sp = to_standard_position(&s)?;
            let h = s.diameter();
            let magnitude = s.vertices().iter().map(|v| v.amax()).fold(h, f64::max);
            let moved = sp
                .labels()
                .iter()
                .enumerate()
                .all(|(i, &l)| (sp.motion().apply(s.vertex(l).as_slice()) - sp.simplex().vertex(i)).norm() <= 1e-10 * magnitude);
            if moved && sp.satisfies_conditions() {
                ok += 1;
            }
        }
    }
    Ok((ok == total, format!("{ok}/{total} simplices in standard position")))
}

fn shear_bounds(seed: u64, _opts: &SeminormOptions) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    let mut pass = true;
    for dim in [2, 3] {
        for s in population(seed, 2, dim, 500) {
            let sp = to_standard_position(&s)?;
            let dec = decompose_affine(&sp)?;
            let shear = dec.shear.matrix();
            let alphas: f64 = sp.alphas().iter().product();
            let vol = sp.simplex().measure();
            let (nb, cb) = if dim == 2 { (2f64.sqrt(), alphas / vol) } else { (2.0, 2.0 / 3.0 * alphas / vol) };
            let (n, c) = (spectral_norm(shear), spectral_condition(shear)?);
            worst = worst.max(n / nb).max(c / cb);
            pass &= le_with_slack(n, nb, DEFAULT_SLACK) && le_with_slack(c, cb, DEFAULT_SLACK);
        }
    }
    Ok((pass, format!("largest norm/bound {worst:.6}")))
}

fn shape_equivalence(seed: u64, _opts: &SeminormOptions) -> Result<(bool, String)> {
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    let mut pass = true;
    for dim in [2, 3] {
        for s in population(seed, 3, dim, 500) {
            let e = equivalence_check(&s, DEFAULT_SLACK)?;
            lo = lo.min(e.ratio);
            hi = hi.max(e.ratio);
            pass &= e.pass && e.circumradius_pass.unwrap_or(true);
        }
    }
    Ok((pass, format!("H_T/H_T0 in [{lo:.4}, {hi:.4}]")))
}

fn closed_form_ratios(seed: u64, _opts: &SeminormOptions) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for dim in [2, 3] {
        for s in population(seed, 4, dim, 500) {
            let sp = to_standard_position(&s)?;
            let ratio = param_h_t(&sp) / s.diameter();
            let expected = match sp.shear() {
                Shear::Planar { t, .. } => 2.0 / t,
                Shear::Spatial { t1, t2, .. } => 6.0 / (t1 * t2),
            };
            worst = worst.max((ratio - expected).abs() / expected);
        }
    }
    Ok((worst < 1e-10, format!("max relative deviation {worst:.2e}")))
}

fn scalar_commuting(seed: u64, opts: &SeminormOptions) -> Result<(bool, String)> {
    let mut r = rng(seed, 5);
    let f = crate::poly::Separable::product(vec![
        crate::poly::Factor1D::sin(1.3),
        crate::poly::Factor1D::Exp { rate: 0.4 },
        crate::poly::Factor1D::cos(0.7),
    ]);
    let mut worst: f64 = 0.0;
    for kind in [ElementKind::Lagrange(1), ElementKind::Lagrange(2), ElementKind::CrouzeixRaviart] {
        let e = FiniteElement::new(kind, 3)?;
        for s in population(seed, 6, 3, 10) {
            worst = worst.max(commuting_check(&e, &f, &s, 20, &mut r, opts)?);
        }
    }
    Ok((worst < 1e-9, format!("max commuting residual {worst:.2e}")))
}

fn optimality(_seed: u64, opts: &SeminormOptions) -> Result<(bool, String)> {
    let mut min_ratio = f64::INFINITY;
    let mut pass = true;
    for j in [2, 6, 10] {
        for eps in [1.25, 1.5, 1.75] {
            let r = optimality_check(0.5f64.powi(j), eps, opts)?;
            min_ratio = min_ratio.min(r.ratio);
            pass &= r.pass;
        }
    }
    Ok((pass, format!("min I_T/H_T {min_ratio:.6}")))
}

fn verfurth_constant(seed: u64, opts: &SeminormOptions) -> Result<(bool, String)> {
    let bound = verfurth_bound(3, 1, 2)?;
    let exact = (bound - 3f64.sqrt() / std::f64::consts::PI).abs() < 1e-12;
    let t = Simplex::reference(3);
    let mut r = rng(seed, 7);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let mut f = MultiPoly::zero(3);
        for q in poly_space_basis(3, 3) {
            let (beta, _) = q.terms().next().unwrap();
            f.add_term(*beta, r.gen_range(-1.0..1.0));
        }
        let semi = seminorm(&f, &t, 2, Exponent::Two, opts)?;
        let best = best_poly_approx(&f, &t, 1, ApproxNorm::h_semi(1), opts)?;
        worst = worst.max(best.error / (t.diameter() * semi));
    }
    Ok((exact && worst <= bound, format!("bound {bound:.6}, worst measured {worst:.6}")))
}

fn rt_dimension_suite(_seed: u64, _opts: &SeminormOptions) -> Result<(bool, String)> {
    let mut pass = true;
    for dim in [2, 3] {
        for k in 0..=2 {
            pass &= build_rt_space(dim, k)?.dimension() == rt_dimension(dim, k);
        }
    }
    Ok((pass, "dimensions for d = 2, 3 and k ≤ 2".into()))
}

fn rt_projection(seed: u64, opts: &SeminormOptions) -> Result<(bool, String)> {
    let mut r = rng(seed, 8);
    let mut worst: f64 = 0.0;
    for dim in [2, 3] {
        for k in 0..=2 {
            let space = build_rt_space(dim, k)?;
            for _ in 0..5 {
                let t = random_simplex(&mut r, dim, 3.0);
                let w = space.basis().iter().fold(VectorPoly::zero(dim, dim), |acc, b| acc.add(&b.scaled(r.gen_range(-1.0..1.0))));
                let v = RtInterpolant::new(w, t.reference_map());
                let iv = rt_interpolate(&space, &v, &t, opts)?;
                let err = seminorm(&Difference { a: &v, b: &iv }, &t, 0, Exponent::Two, opts)?;
                worst = worst.max(err / seminorm(&v, &t, 0, Exponent::Two, opts)?);
            }
        }
    }
    Ok((worst < 1e-10, format!("max relative residual {worst:.2e}")))
}

fn random_map(r: &mut ChaCha8Rng, dim: usize) -> AffineMap {
    loop {
        let m = DMatrix::from_fn(dim, dim, |i, j| if i == j { 1.0 } else { 0.0 } + r.gen_range(-0.6..0.6));
        let c = DVector::from_fn(dim, |_, _| r.gen_range(-1.0..1.0));
        if let Ok(map) = AffineMap::new(m, c) {
            if map.determinant().abs() > 0.05 {
                return map;
            }
        }
    }
}

fn piola_suite(seed: u64, _opts: &SeminormOptions) -> Result<(bool, String)> {
    let mut r = rng(seed, 10);
    let mut worst: f64 = 0.0;
    for dim in [2, 3] {
        for _ in 0..10 {
            let piola = PiolaMap::new(random_map(&mut r, dim));
            let v = random_vector_field(&mut r, dim, 2);
            let phi = random_vector_field(&mut r, dim, 2).0.remove(0);
            worst = worst.max(piola_identities(&piola, &v, &phi).into_iter().fold(0.0, f64::max));
        }
    }
    Ok((worst < 1e-9, format!("max relative residual {worst:.2e}")))
}

fn rt_commuting(seed: u64, opts: &SeminormOptions) -> Result<(bool, String)> {
    let mut r = rng(seed, 11);
    let mut worst: f64 = 0.0;
    for dim in [2, 3] {
        for k in 0..=1 {
            let space = build_rt_space(dim, k)?;
            for _ in 0..3 {
                let v: Arc<dyn SmoothField> = Arc::new(random_vector_field(&mut r, dim, k + 2));
                worst = worst.max(rt_commuting_check(&space, v, &random_map(&mut r, dim), opts)?);
            }
        }
    }
    Ok((worst < 1e-9, format!("max commuting residual {worst:.2e}")))
}

fn stability(seed: u64, opts: &SeminormOptions) -> Result<(bool, String)> {
    let a = component_stability(3, 0, SimplexType::TypeI, StabilityEstimate::Divergence, 20, seed, opts)?;
    let b = component_stability(3, 0, SimplexType::TypeII, StabilityEstimate::Diagonal, 20, seed, opts)?;
    let sup = a.sup.iter().chain(&b.sup).copied().fold(0.0, f64::max);
    Ok((sup.is_finite(), format!("largest component supremum {sup:.4}")))
}

fn mesh_conformity(_seed: u64, _opts: &SeminormOptions) -> Result<(bool, String)> {
    let v = vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![1.0, 1.0], vec![1.0, -1.0], vec![1.0, 0.0]];
    let t_junction = Mesh::new(2, v, vec![vec![0, 1, 2], vec![0, 4, 3], vec![4, 1, 3]])?;
    let detected = !conformity_check(&t_junction).conforming;
    let mut families_ok = true;
    for text in ["remark-tetra", "aniso-strip-2d:gamma=2;n=2,3,4", "aniso-box-3d:n=1,2", "uniform-ref:levels=1,2,3"] {
        let spec: FamilySpec = text.parse()?;
        let meshes = generate_family(&spec)?;
        families_ok &= meshes.iter().all(|m| conformity_check(m).conforming);
        let hs = meshes.iter().map(|m| m.big_h()).collect::<Result<Vec<_>>>()?;
        families_ok &= hs.windows(2).all(|w| w[1] < w[0]);
    }
    Ok((detected && families_ok, format!("T-junction detected: {detected}, families conforming and H decreasing: {families_ok}")))
}

fn mesh_roundtrip(_seed: u64, _opts: &SeminormOptions) -> Result<(bool, String)> {
    let spec: FamilySpec = "aniso-strip-2d:gamma=2;n=4".parse()?;
    let mesh = generate_family(&spec)?.remove(0);
    let text = render_mesh(&mesh);
    let back = parse_mesh(&text)?.mesh;
    let pass = back == mesh && render_mesh(&back) == text;
    Ok((pass, format!("{} cells round-tripped", mesh.n_cells())))
}

fn p1_order(_seed: u64, opts: &SeminormOptions) -> Result<(bool, String)> {
    let config = ConvergenceConfig {
        element: ElementFamily::Lagrange,
        k: 1,
        l: 1,
        m: 0,
        p: Exponent::Two,
        field: "sinsin".into(),
        family: "uniform-ref:levels=1,2,3,4".parse()?,
        stability_tol: DEFAULT_STABILITY_TOL,
        order_tol: DEFAULT_ORDER_TOL,
    };
    let report = run_convergence(&config, opts)?;
    let order = report.rows.last().and_then(|r| r.order).unwrap_or(f64::NAN);
    Ok((report.pass, format!("last observed order {order:.3}")))
}
