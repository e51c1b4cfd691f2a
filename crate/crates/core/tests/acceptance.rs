//! Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::{Duration, Instant};

use anisofem::experiments::{run_convergence, BoundReport, ConvergenceConfig, ElementFamily};
use anisofem::geometry::{decompose_affine, random_simplex, to_standard_position, AffineMap, Shear, Simplex, SimplexType};
use anisofem::interp::optimality_check;
use anisofem::mesh::{conformity_check, generate_family, parse_mesh, read_mesh, render_mesh, write_mesh, FamilySpec, Mesh};
use anisofem::poly::{
    best_poly_approx, seminorm, verfurth_bound, ApproxNorm, Difference, Exponent, MultiIndex, MultiPoly, QuadratureRule,
    SeminormOptions, SmoothField, VectorPoly,
};
use anisofem::rt::{
    build_rt_space, component_stability_doubling, piola_identities, random_vector_field, rt_commuting_check, rt_dimension,
    PiolaMap, RtInterpolator, StabilityEstimate,
};
use anisofem::shape::param_h_t;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = anisofem::Result<(bool, String)>;

const SLACK: f64 = 1e-9;

fn rng(salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5eed_0000 + salt)
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn distances(s: &Simplex) -> Vec<f64> {
    let v = s.vertices();
    let mut out = Vec::new();
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            out.push((&v[i] - &v[j]).norm());
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

fn volume(s: &Simplex) -> f64 {
    let d = s.dim();
    let v = s.vertices();
    let m = DMatrix::from_fn(d, d, |i, j| v[j + 1][i] - v[0][i]);
    let fact = (1..=d).product::<usize>() as f64;
    m.determinant().abs() / fact
}

fn spectral(m: &DMatrix<f64>) -> (f64, f64) {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    (max, max / min)
}

/// `H_{T0}` from the sorted edge lengths: `h²/|T|` times the shortest edge
/// (triangles) or the product of the two shortest edges (tetrahedra).
fn h_t0(s: &Simplex) -> f64 {
    let e = distances(s);
    let h = *e.last().unwrap();
    let factor = if s.dim() == 2 { e[0] } else { e[0] * e[1] };
    h * h / volume(s) * factor
}

fn population(salt: u64, dim: usize, n: usize, aspect: f64) -> Vec<Simplex> {
    let mut r = rng(salt);
    (0..n).map(|_| random_simplex(&mut r, dim, aspect)).collect()
}

fn random_poly(r: &mut ChaCha8Rng, dim: usize, lo: u32, hi: u32) -> MultiPoly {
    let mut p = MultiPoly::zero(dim);
    for order in lo..=hi {
        for beta in MultiIndex::all_of_order(dim, order) {
            p.add_term(beta, r.gen_range(-1.0..1.0));
        }
    }
    p
}

/// `p + x q` with `p ∈ (𝒫^k)^d` and `q` homogeneous of degree `k`.
fn random_rt_field(r: &mut ChaCha8Rng, dim: usize, k: u32) -> VectorPoly {
    let q = random_poly(r, dim, k, k);
    VectorPoly((0..dim).map(|i| &random_poly(r, dim, 0, k) + &(&MultiPoly::variable(dim, i) * &q)).collect())
}

fn random_map(r: &mut ChaCha8Rng, dim: usize) -> AffineMap {
    loop {
        let m = DMatrix::from_fn(dim, dim, |i, j| if i == j { 1.0 } else { 0.0 } + r.gen_range(-0.7..0.7));
        let c = DVector::from_fn(dim, |_, _| r.gen_range(-2.0..2.0));
        if let Ok(map) = AffineMap::new(m, c) {
            if map.determinant().abs() > 0.05 {
                return map;
            }
        }
    }
}

fn rt_dimensions() -> Outcome {
    let mut pass = true;
    let mut got = Vec::new();
    for k in 0..=3usize {
        let d2 = (k + 1) * (k + 3);
        let d3 = (k + 1) * (k + 2) * (k + 4) / 2;
        for (dim, expected) in [(2, d2), (3, d3)] {
            // (𝒫^k)^d plus x times the homogeneous polynomials of degree k
            let counted = dim * binomial(k + dim, dim) + binomial(k + dim - 1, dim - 1);
            let built = build_rt_space(dim, k as u32)?.dimension();
            pass &= built == expected && counted == expected && rt_dimension(dim, k as u32) == expected;
            got.push(built.to_string());
        }
    }
    Ok((pass, format!("dims {}", got.join(","))))
}

fn rt_projection() -> Outcome {
    let opts = SeminormOptions::default();
    let mut r = rng(2);
    let mut worst: f64 = 0.0;
    for dim in [2, 3] {
        for k in 0..=3 {
            let space = build_rt_space(dim, k)?;
            for batch in 0..10 {
                let t = if batch == 0 { Simplex::reference(dim) } else { random_simplex(&mut r, dim, 1.0) };
                let interp = RtInterpolator::new(&space, &t)?;
                for _ in 0..10 {
                    let v = random_rt_field(&mut r, dim, k);
                    let iv = interp.interpolate(&v, &opts)?;
                    let err = seminorm(&Difference { a: &v, b: &iv }, &t, 0, Exponent::Two, &opts)?;
                    worst = worst.max(err / seminorm(&v, &t, 0, Exponent::Two, &opts)?);
                }
            }
        }
    }
    Ok((worst < 1e-10, format!("max relative residual {worst:.2e} over 100 fields per (d,k), k<=3")))
}

fn piola_and_commuting() -> Outcome {
    let opts = SeminormOptions::default();
    let mut r = rng(3);
    let (mut identities, mut pointwise, mut commuting): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for dim in [2, 3] {
        for n in 0..100u32 {
            let map = random_map(&mut r, dim);
            let piola = PiolaMap::new(map.clone());
            let v_hat = random_vector_field(&mut r, dim, 2);
            let phi_hat = random_poly(&mut r, dim, 0, 2);
            identities = identities.max(piola_identities(&piola, &v_hat, &phi_hat).into_iter().fold(0.0, f64::max));
            // div(Ψ v̂)(Φ x̂) |det A| = div v̂(x̂)
            let div = piola.push_poly(&v_hat).divergence();
            let div_hat = v_hat.divergence();
            let det = map.determinant().abs();
            let scale = div_hat.max_coefficient().max(1.0);
            for _ in 0..5 {
                let x: Vec<f64> = (0..dim).map(|_| r.gen_range(0.0..1.0 / dim as f64)).collect();
                let lhs = div.eval(map.apply(&x).as_slice()) * det;
                pointwise = pointwise.max((lhs - div_hat.eval(&x)).abs() / scale);
            }
            let k = n % 3;
            let space = build_rt_space(dim, k)?;
            let w: Arc<dyn SmoothField> = Arc::new(random_vector_field(&mut r, dim, k + 2));
            commuting = commuting.max(rt_commuting_check(&space, w, &map, &opts)?);
        }
    }
    let pass = identities < 1e-9 && pointwise < 1e-9 && commuting < 1e-9;
    Ok((pass, format!("identities {identities:.2e}, pointwise divergence {pointwise:.2e}, commuting {commuting:.2e}")))
}

fn matrix_norm_bounds() -> Outcome {
    let mut pass = true;
    let mut worst: f64 = 0.0;
    for dim in [2, 3] {
        for s in population(4, dim, 5000, 4.0) {
            let sp = to_standard_position(&s)?;
            let dec = decompose_affine(&sp)?;
            let (norm, cond) = spectral(dec.shear.matrix());
            let alphas: f64 = sp.alphas().iter().product();
            let (nb, cb) = if dim == 2 { (2f64.sqrt(), alphas / volume(&s)) } else { (2.0, 2.0 / 3.0 * alphas / volume(&s)) };
            pass &= norm <= nb * (1.0 + SLACK) && cond <= cb * (1.0 + SLACK);
            worst = worst.max(norm / nb).max(cond / cb);
        }
    }
    Ok((pass, format!("10^4 simplices, largest value/bound {worst:.6}")))
}

fn equivalence() -> Outcome {
    let mut pass = true;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    let (mut rlo, mut rhi) = (f64::INFINITY, 0.0f64);
    for dim in [2, 3] {
        for s in population(4, dim, 5000, 4.0) {
            let big_h = param_h_t(&to_standard_position(&s)?);
            let big_h0 = h_t0(&s);
            pass &= 0.5 * big_h0 <= big_h * (1.0 + SLACK) && big_h <= 2.0 * big_h0 * (1.0 + SLACK);
            lo = lo.min(big_h / big_h0);
            hi = hi.max(big_h / big_h0);
            if dim == 2 {
                let e = distances(&s);
                let r2 = e[0] * e[1] * e[2] / (4.0 * volume(&s));
                pass &= 2.0 * r2 <= big_h0 * (1.0 + SLACK) && big_h0 <= 8.0 * r2 * (1.0 + SLACK);
                rlo = rlo.min(big_h0 / r2);
                rhi = rhi.max(big_h0 / r2);
            }
        }
    }
    Ok((pass, format!("H_T/H_T0 in [{lo:.4}, {hi:.4}], H_T0/R in [{rlo:.4}, {rhi:.4}]")))
}

fn closed_forms() -> Outcome {
    let (mut worst2, mut worst3): (f64, f64) = (0.0, 0.0);
    for s in population(6, 2, 2000, 3.0) {
        // largest angle: at the vertex opposite the longest edge, from the edge
        // vectors there (side lengths alone are ill-conditioned for needles)
        let v = s.vertices();
        let (i, c) = (0..3)
            .map(|i| (i, (&v[(i + 1) % 3] - &v[(i + 2) % 3]).norm()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        let (p, q) = (&v[(i + 1) % 3] - &v[i], &v[(i + 2) % 3] - &v[i]);
        let theta = (p[0] * q[1] - p[1] * q[0]).abs().atan2(p.dot(&q));
        let sin = theta.sin();
        let ratio = param_h_t(&to_standard_position(&s)?) / c;
        worst2 = worst2.max((ratio - 2.0 / sin).abs() * sin / 2.0);
    }
    for s in population(6, 3, 2000, 3.0) {
        let sp = to_standard_position(&s)?;
        let Shear::Spatial { t1, t2, .. } = sp.shear() else { unreachable!() };
        let expected = 6.0 / (t1 * t2);
        // α₂ is measured from x₂ on Type II simplices
        let v = sp.simplex().vertices();
        let base = if sp.simplex_type() == SimplexType::TypeII { 1 } else { 0 };
        let alphas = (&v[1] - &v[0]).norm() * (&v[2] - &v[base]).norm() * (&v[3] - &v[0]).norm();
        let from_vertices = alphas / volume(&s);
        let ratio = param_h_t(&sp) / s.diameter();
        worst3 = worst3.max((ratio - expected).abs() / expected).max((from_vertices - expected).abs() / expected);
    }
    Ok((worst2.max(worst3) < 1e-10, format!("max relative deviation 2D {worst2:.2e}, 3D {worst3:.2e}")))
}

fn optimality_grid() -> Outcome {
    let opts = SeminormOptions::default();
    let bound = 1.0 / (24.0 * 10f64.sqrt());
    let mut pass = true;
    let (mut worst, mut min_ratio): (f64, f64) = (0.0, f64::INFINITY);
    for j in 2..=10 {
        let s = 0.5f64.powi(j);
        for eps in [1.25, 1.5, 1.75] {
            let r = optimality_check(s, eps, &opts)?;
            let i_t = (s.powf(2.0 - eps) + s.powf(eps)) / 8.0;
            let h_t = 6.0 * 2f64.sqrt() * s.powi(3) * ((s / 2.0).powi(2) + s.powf(2.0 * eps)).sqrt() / s.powf(2.0 + eps);
            worst = worst.max((r.i_t - i_t).abs()).max((r.big_h_t - h_t).abs() / h_t);
            min_ratio = min_ratio.min(r.i_t / r.big_h_t);
            pass &= r.i_t / r.big_h_t >= bound - 1e-6 && r.pass;
        }
    }
    pass &= worst < 1e-8;
    Ok((pass, format!("27 cases, min I_T/H_T {min_ratio:.6} >= {bound:.6}, closed-form deviation {worst:.2e}")))
}

fn families() -> Vec<&'static str> {
    vec!["aniso-strip-2d:gamma=1", "aniso-strip-2d:gamma=2", "aniso-strip-2d:gamma=3", "remark-tetra"]
}

fn convergence(element: ElementFamily, k: u32, l: u32, m: u32, field: &str, family: &str) -> anisofem::Result<BoundReport> {
    let config = ConvergenceConfig {
        element,
        k,
        l,
        m,
        p: Exponent::Two,
        field: field.into(),
        family: family.parse()?,
        stability_tol: 0.05,
        order_tol: 0.2,
    };
    run_convergence(&config, &SeminormOptions::default())
}

fn summarise(report: &BoundReport, label: &str, with_order: bool, failures: &mut Vec<String>) -> bool {
    let last = report.rows.last().unwrap();
    let running = report.rows[..report.rows.len() - 1].iter().map(|r| r.max_element_ratio).fold(0.0, f64::max);
    let stable = report.rows.len() == 5 && last.max_element_ratio.is_finite() && last.max_element_ratio <= 1.05 * running;
    let order_ok = !with_order || !report.order_checked || {
        let orders: Vec<f64> = report.rows.iter().rev().take(2).filter_map(|r| r.order).collect();
        orders.len() == 2 && orders.iter().all(|o| (o - report.expected_order).abs() <= 0.2)
    };
    let ok = stable && order_ok && report.stable == stable;
    if !ok {
        failures.push(format!("{label} (stable {stable}, order {order_ok})"));
    }
    ok
}

fn lagrange_cr() -> Outcome {
    let mut failures = Vec::new();
    let (mut runs, mut checked) = (0, 0);
    let cases = [
        (ElementFamily::Lagrange, 1, 1, 0),
        (ElementFamily::Lagrange, 1, 1, 1),
        (ElementFamily::Lagrange, 2, 2, 0),
        (ElementFamily::Lagrange, 2, 2, 1),
        (ElementFamily::Cr, 1, 1, 0),
        (ElementFamily::Cr, 1, 1, 1),
    ];
    for family in families() {
        let field = if family.starts_with("remark") { "exp" } else { "sinsin" };
        for (element, k, l, m) in cases {
            let report = convergence(element, k, l, m, field, family)?;
            runs += 1;
            checked += usize::from(report.order_checked);
            summarise(&report, &format!("{element} k={k} l={l} m={m} {family}"), true, &mut failures);
        }
    }
    Ok((failures.is_empty(), format!("{runs} runs, {checked} order checks; failures: {failures:?}")))
}

fn rt_families() -> Outcome {
    let mut failures = Vec::new();
    let mut runs = 0;
    for family in families() {
        for (k, l) in [(0, 0), (1, 0), (1, 1)] {
            let report = convergence(ElementFamily::Rt, k, l, 0, "sincos-vec", family)?;
            runs += 1;
            summarise(&report, &format!("RT{k} l={l} {family}"), false, &mut failures);
        }
    }
    Ok((failures.is_empty(), format!("{runs} runs; failures: {failures:?}")))
}

fn verfurth() -> Outcome {
    let opts = SeminormOptions::default();
    let bound = verfurth_bound(3, 1, 2)?;
    let exact = (bound - 3f64.sqrt() / PI).abs() < 1e-12;
    let limit = 6f64.sqrt() / PI;
    let t = Simplex::reference(3);
    let rule = QuadratureRule::for_degree(3, 8);
    let mut r = rng(10);
    let (mut worst, mut disagreement): (f64, f64) = (0.0, 0.0);
    for n in 0..100 {
        let f = random_poly(&mut r, 3, 0, 3 + n % 2);
        // the best H¹ approximation from 𝒫¹ matches the mean gradient
        let grads: Vec<MultiPoly> = (0..3).map(|i| f.derivative(MultiIndex::unit(i))).collect();
        let means: Vec<f64> = grads.iter().map(|g| rule.integrate_reference(|x| g.eval(x)) * 6.0).collect();
        let err2: f64 = grads.iter().zip(&means).map(|(g, m)| rule.integrate_reference(|x| (g.eval(x) - m).powi(2))).sum();
        let semi2: f64 =
            MultiIndex::all_of_order(3, 2).into_iter().map(|b| rule.integrate_reference(|x| f.eval_derivative(b, x).powi(2))).sum();
        let ratio = err2.sqrt() / semi2.sqrt();
        worst = worst.max(ratio);
        let best = best_poly_approx(&f, &t, 1, ApproxNorm::h_semi(1), &opts)?;
        disagreement = disagreement.max((best.error - err2.sqrt()).abs() / err2.sqrt().max(1e-300));
    }
    let pass = exact && worst < limit && disagreement < 1e-8;
    Ok((pass, format!("bound {bound:.12}, worst H1 constant {worst:.6} < {limit:.6}, library/oracle {disagreement:.1e}")))
}

fn component_stability() -> Outcome {
    let opts = SeminormOptions::default();
    let mut pass = true;
    let mut parts = Vec::new();
    for (reference, estimate, name) in
        [(SimplexType::TypeI, StabilityEstimate::Divergence, "T1/div"), (SimplexType::TypeII, StabilityEstimate::Diagonal, "T2/diag")]
    {
        for k in 0..=1 {
            let (_, large, change) = component_stability_doubling(3, k, reference, estimate, 200, 11, &opts)?;
            let sup = large.sup.iter().copied().fold(0.0, f64::max);
            pass &= large.sup.iter().all(|s| s.is_finite()) && change < 0.10;
            parts.push(format!("{name} k={k} sup {sup:.4} change {:.2}%", 100.0 * change));
        }
    }
    Ok((pass, parts.join("; ")))
}

fn mesh_plumbing() -> Outcome {
    let t2 = Mesh::new(
        2,
        vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![1.0, 1.0], vec![1.0, -1.0], vec![1.0, 0.0]],
        vec![vec![0, 1, 2], vec![0, 4, 3], vec![4, 1, 3]],
    )?;
    let t3 = Mesh::new(
        3,
        vec![
            vec![0.0, 0.0, 0.0],
            vec![2.0, 0.0, 0.0],
            vec![0.0, 2.0, 0.0],
            vec![0.0, 0.0, -1.0],
            vec![1.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ],
        vec![vec![0, 1, 2, 3], vec![0, 1, 4, 5], vec![0, 4, 2, 5]],
    )?;
    let detected = !conformity_check(&t2).conforming && !conformity_check(&t3).conforming;

    let dir = tempfile::tempdir().map_err(anisofem::Error::Io)?;
    let specs = [
        "remark-tetra",
        "aniso-strip-2d:gamma=1",
        "aniso-strip-2d:gamma=2",
        "aniso-strip-2d:gamma=3",
        "aniso-box-3d",
        "aniso-box-3d:gamma2=2;gamma3=1",
        "aniso-box-3d:gamma2=2;gamma3=3",
        "uniform-ref:seed=triangle",
        "uniform-ref:seed=square",
        "uniform-ref:seed=tetra;levels=1,2,3,4",
        "uniform-ref:seed=cube;levels=1,2,3",
    ];
    let (mut roundtrip, mut decreasing, mut conforming) = (true, true, true);
    let mut meshes = 0;
    for text in specs {
        let spec: FamilySpec = text.parse()?;
        let family = generate_family(&spec)?;
        let hs: Vec<f64> = family.iter().map(|m| m.simplices().map(|s| h_t0(&s)).fold(0.0, f64::max)).collect();
        decreasing &= hs.windows(2).all(|w| w[1] < w[0]);
        for (i, mesh) in family.iter().enumerate() {
            meshes += 1;
            conforming &= conformity_check(mesh).conforming;
            let rendered = render_mesh(mesh);
            let parsed = parse_mesh(&rendered)?.mesh;
            let path = dir.path().join(format!("{}-{i}.anisomesh", spec.id()));
            write_mesh(mesh, &path)?;
            let bytes = std::fs::read(&path).map_err(anisofem::Error::Io)?;
            let reread = read_mesh(&path)?.mesh;
            roundtrip &= &parsed == mesh && render_mesh(&parsed) == rendered && bytes == rendered.as_bytes() && &reread == mesh;
        }
    }
    let pass = detected && roundtrip && decreasing && conforming;
    Ok((
        pass,
        format!(
            "T-junctions detected {detected}; {meshes} meshes, round trip {roundtrip}, conforming {conforming}, H decreasing {decreasing}"
        ),
    ))
}

fn main() {
    let criteria: [(&str, u64, fn() -> Outcome); 12] = [
        ("RT dimension", 1, rt_dimensions),
        ("RT unisolvence and projection", 10, rt_projection),
        ("Piola identities and commutation", 10, piola_and_commuting),
        ("matrix-norm bounds", 30, matrix_norm_bounds),
        ("equivalence constants", 30, equivalence),
        ("closed-form ratios", 30, closed_forms),
        ("optimality", 5, optimality_grid),
        ("Lagrange/CR error ratios", 300, lagrange_cr),
        ("RT error ratios", 300, rt_families),
        ("Verfurth constants", 30, verfurth),
        ("component stability", 120, component_stability),
        ("mesh plumbing", 30, mesh_plumbing),
    ];
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(*budget);
        let (pass, detail) = match outcome {
            Ok((pass, detail)) => (pass && in_time, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!pass);
        let status = if pass { "PASS" } else { "FAIL" };
        println!("{status} {:>2} {name}: {detail} [{:.2}s, budget {budget}s]", i + 1, elapsed.as_secs_f64());
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
