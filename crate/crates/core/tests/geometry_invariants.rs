use anisofem::geometry::{decompose_affine, random_orthogonal, random_simplex, to_standard_position, Shear, Simplex};
use anisofem::linalg::{spectral_condition, spectral_norm};
use anisofem::shape::{circumradius_2d, le_with_slack, param_h_t, param_h_t0, DEFAULT_SLACK};
use nalgebra::DVector;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const POPULATION: usize = 10_000;

fn population(dim: usize, seed: u64, max_log10_aspect: f64) -> impl Iterator<Item = Simplex> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..POPULATION).map(move |_| random_simplex(&mut rng, dim, max_log10_aspect))
}

/// Relative rounding error of `|T|` computed from coordinates: the volume
/// determinant has condition number about `h^d / |T|`.
fn volume_tolerance(s: &Simplex) -> f64 {
    let h = s.diameter();
    let scale = s.vertices().iter().map(|v| v.amax()).fold(h, f64::max);
    64.0 * f64::EPSILON * scale * h.powi(s.dim() as i32 - 1) / s.measure()
}

#[test]
fn motion_round_trip_and_conditions() {
    for dim in [2, 3] {
        for s in population(dim, 11 + dim as u64, 6.0) {
            let sp = to_standard_position(&s).unwrap();
            let h = s.diameter();
            let magnitude = s.vertices().iter().map(|v| v.amax()).fold(h, f64::max);
            for (i, &l) in sp.labels().iter().enumerate() {
                let y = sp.motion().apply(s.vertex(l).as_slice());
                assert!((y - sp.simplex().vertex(i)).norm() <= 1e-10 * magnitude);
            }
            let (a, b) = (s.edges(), sp.simplex().edges());
            for (x, y) in a.iter().zip(&b) {
                assert!((x.length - y.length).abs() <= 1e-12 * h);
            }
            assert!(rel(sp.simplex().measure(), s.measure()) <= volume_tolerance(&s));
            assert!(sp.satisfies_conditions(), "{:?}", s);
            let al = sp.alphas();
            if let Shear::Spatial { s1, s21, .. } = sp.shear() {
                assert!(al[1] * s1 <= al[0] / 2.0 + 1e-12 * al[0]);
                assert!(al[2] * s21 <= al[0] / 2.0 + 1e-12 * al[0]);
            } else {
                assert!(al[1] <= al[0] * (1.0 + 1e-12));
            }
        }
    }
}

#[test]
fn motion_preserves_lengths_and_measure() {
    for dim in [2, 3] {
        let mut checked = 0;
        for s in population(dim, 5 + dim as u64, 0.0) {
            if s.diameter().powi(dim as i32) / s.measure() > 1e3 {
                continue;
            }
            checked += 1;
            let sp = to_standard_position(&s).unwrap();
            for (x, y) in s.edges().iter().zip(&sp.simplex().edges()) {
                assert!(rel(y.length, x.length) <= 1e-12);
            }
            assert!(rel(sp.simplex().measure(), s.measure()) <= 1e-12);
        }
        assert!(checked > POPULATION / 2);
    }
}

#[test]
fn shear_matrix_norm_bounds() {
    for dim in [2, 3] {
        for s in population(dim, 23 + dim as u64, 6.0) {
            let sp = to_standard_position(&s).unwrap();
            let dec = decompose_affine(&sp).unwrap();
            let shear = dec.shear.matrix();
            let alphas: f64 = sp.alphas().iter().product();
            let vol = sp.simplex().measure();
            let (norm_bound, cond_bound) = if dim == 2 { (2f64.sqrt(), alphas / vol) } else { (2.0, 2.0 / 3.0 * alphas / vol) };
            assert!(le_with_slack(spectral_norm(shear), norm_bound, DEFAULT_SLACK));
            let cond = spectral_condition(shear).unwrap();
            assert!(le_with_slack(cond, cond_bound, DEFAULT_SLACK), "cond {cond} > {cond_bound}");
            let (a2, sh) = dec.parameters();
            assert_eq!(a2, sp.alphas());
            assert_eq!(sh, sp.shear());
        }
    }
}

#[test]
fn equivalence_of_shape_parameters() {
    for dim in [2, 3] {
        for s in population(dim, 37 + dim as u64, 6.0) {
            let sp = to_standard_position(&s).unwrap();
            let (ht, ht0) = (param_h_t(&sp), param_h_t0(&s));
            assert!(le_with_slack(0.5 * ht0, ht, DEFAULT_SLACK) && le_with_slack(ht, 2.0 * ht0, DEFAULT_SLACK), "{ht} vs {ht0}");
            let ratio = ht / s.diameter();
            match sp.shear() {
                Shear::Planar { t, .. } => {
                    assert!((ratio - 2.0 / t).abs() <= 1e-10 * ratio);
                    let r = circumradius_2d(&s).unwrap();
                    assert!(le_with_slack(2.0 * r, ht0, DEFAULT_SLACK) && le_with_slack(ht0, 8.0 * r, DEFAULT_SLACK));
                }
                Shear::Spatial { t1, t2, .. } => assert!((ratio - 6.0 / (t1 * t2)).abs() <= 1e-10 * ratio),
            }
        }
    }
}

fn simplex_strategy(dim: usize, max_log10_aspect: f64) -> impl Strategy<Value = Simplex> {
    (any::<u64>(), 0.0..=max_log10_aspect)
        .prop_map(move |(seed, aspect)| random_simplex(&mut ChaCha8Rng::seed_from_u64(seed), dim, aspect))
}

/// Simplices whose volume is computed from coordinates without significant
/// cancellation.
fn well_conditioned(dim: usize) -> impl Strategy<Value = Simplex> {
    simplex_strategy(dim, 0.0).prop_filter("ill-conditioned volume", |s| s.diameter().powi(s.dim() as i32) / s.measure() <= 1e3)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn moved(s: &Simplex, seed: u64) -> Simplex {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = s.dim();
    let q = random_orthogonal(&mut rng, d);
    let shift = DVector::from_fn(d, |i, _| i as f64 - 0.7);
    Simplex::new(s.vertices().iter().map(|v| &q * v + &shift).collect()).unwrap()
}

proptest! {
    #[test]
    fn shape_parameters_are_rigid_invariant(s in prop_oneof![well_conditioned(2), well_conditioned(3)], seed in any::<u64>()) {
        let m = moved(&s, seed);
        let (a, b) = (to_standard_position(&s).unwrap(), to_standard_position(&m).unwrap());
        prop_assert!(rel(param_h_t0(&m), param_h_t0(&s)) < 1e-12);
        prop_assert!(rel(param_h_t(&b), param_h_t(&a)) < 1e-12);
    }

    #[test]
    fn anisotropic_invariance_within_rounding(s in prop_oneof![simplex_strategy(2, 6.0), simplex_strategy(3, 6.0)], seed in any::<u64>()) {
        let m = moved(&s, seed);
        let tol = volume_tolerance(&s) + volume_tolerance(&m);
        let (a, b) = (to_standard_position(&s).unwrap(), to_standard_position(&m).unwrap());
        prop_assert!(rel(param_h_t0(&m), param_h_t0(&s)) < tol);
        prop_assert!(rel(param_h_t(&b), param_h_t(&a)) < tol);
    }

    #[test]
    fn shape_parameters_scale_linearly(s in prop_oneof![well_conditioned(2), well_conditioned(3)], lambda in 1e-3..1e3f64) {
        let scaled = Simplex::new(s.vertices().iter().map(|v| v * lambda).collect()).unwrap();
        let (a, b) = (to_standard_position(&s).unwrap(), to_standard_position(&scaled).unwrap());
        prop_assert!(rel(param_h_t0(&scaled), lambda * param_h_t0(&s)) < 1e-12);
        prop_assert!(rel(param_h_t(&b), lambda * param_h_t(&a)) < 1e-12);
    }
}
