use anisofem::mesh::{conformity_check, generate_family, parse_mesh, refine_uniform, render_mesh, FamilySpec, Mesh, Seed};
use proptest::prelude::*;

fn volume(mesh: &Mesh) -> f64 {
    mesh.simplices().map(|s| s.measure()).sum()
}

fn strip_spec() -> impl Strategy<Value = String> {
    (1.0f64..3.0, prop::collection::btree_set(1u32..7, 2..4)).prop_map(|(gamma, n)| {
        let n: Vec<String> = n.into_iter().map(|v| v.to_string()).collect();
        format!("aniso-strip-2d:gamma={gamma};n={}", n.join(","))
    })
}

fn box_spec() -> impl Strategy<Value = String> {
    (1.0f64..2.5, 1.0f64..2.5, prop::collection::btree_set(1u32..4, 2..3)).prop_map(|(g2, g3, n)| {
        let n: Vec<String> = n.into_iter().map(|v| v.to_string()).collect();
        format!("aniso-box-3d:gamma2={g2};gamma3={g3};n={}", n.join(","))
    })
}

fn check_family(text: &str) -> Result<(), TestCaseError> {
    let spec: FamilySpec = text.parse().unwrap();
    prop_assert_eq!(spec.to_string().parse::<FamilySpec>().unwrap(), spec.clone());
    let family = generate_family(&spec).unwrap();
    prop_assert_eq!(&generate_family(&spec).unwrap(), &family);
    let mut last = f64::INFINITY;
    for mesh in &family {
        prop_assert!(conformity_check(mesh).conforming, "{}", text);
        prop_assert!((volume(mesh) - 1.0).abs() < 1e-12);
        let text = render_mesh(mesh);
        let back = parse_mesh(&text).unwrap();
        prop_assert!(back.conformity.conforming);
        prop_assert_eq!(&back.mesh, mesh);
        prop_assert_eq!(render_mesh(&back.mesh), text);
        let h = mesh.big_h().unwrap();
        prop_assert!(h < last);
        last = h;
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn strip_families(text in strip_spec()) {
        check_family(&text)?;
    }

    #[test]
    fn box_families(text in box_spec()) {
        check_family(&text)?;
    }

    #[test]
    fn hanging_node_on_any_interior_edge_is_detected(nx in 1usize..5, pick in any::<prop::sample::Index>()) {
        // split one triangle of a conforming strip at the midpoint of an interior edge
        let mesh = generate_family(&format!("aniso-strip-2d:n={nx}").parse().unwrap()).unwrap().remove(0);
        let mut vertices = mesh.vertices().to_vec();
        let mut cells = mesh.cells().to_vec();
        let mut interior = Vec::new();
        for (c, cell) in cells.iter().enumerate() {
            for i in 0..3 {
                let (a, b) = (cell[i], cell[(i + 1) % 3]);
                let shared = cells.iter().filter(|o| o.contains(&a) && o.contains(&b)).count();
                if shared == 2 {
                    interior.push((c, a, b, cell[(i + 2) % 3]));
                }
            }
        }
        prop_assume!(!interior.is_empty());
        let (c, a, b, opposite) = interior[pick.index(interior.len())];
        let mid: Vec<f64> = vertices[a].iter().zip(&vertices[b]).map(|(x, y)| 0.5 * (x + y)).collect();
        vertices.push(mid);
        let m = vertices.len() - 1;
        cells[c] = vec![a, m, opposite];
        cells.push(vec![m, b, opposite]);
        let split = Mesh::new(2, vertices, cells).unwrap();
        prop_assert!(!conformity_check(&split).conforming);
    }
}

#[test]
fn refinement_preserves_volume_and_conformity() {
    for seed in [Seed::Triangle, Seed::Square, Seed::Tetra, Seed::Cube] {
        let mut mesh = seed.mesh();
        let v0 = volume(&mesh);
        for _ in 0..3 {
            let finer = refine_uniform(&mesh).unwrap();
            assert_eq!(finer.n_cells(), mesh.n_cells() * (1 << mesh.dim()));
            assert!((volume(&finer) - v0).abs() < 1e-12 * v0);
            assert!(conformity_check(&finer).conforming);
            assert!(finer.h() < mesh.h());
            mesh = finer;
        }
    }
}
