use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use nalgebra::{Rotation3, Unit};
use np_spectra::curves::{sigma_max, sigma_point};
use np_spectra::geometry::{cone_from_edges, ConeSpec, PolyhedralCone, Polyhedron, PolyhedronSpec, Vec3};
use np_spectra::mellin::{mellin_m1, mellin_m3, MellinTable};
use np_spectra::nystrom::{assemble_with, build_mesh, NystromSystem};
use np_spectra::spectra::{congruence_classes, energy_radius};
use np_spectra::{ExecPolicy, C64};
use proptest::prelude::*;

fn data(name: &str) -> String {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../cli/data").join(name);
    std::fs::read_to_string(path).unwrap()
}

fn cone(name: &str) -> PolyhedralCone {
    serde_json::from_str::<ConeSpec>(&data(name)).unwrap().build().unwrap()
}

fn poly_spec(name: &str) -> PolyhedronSpec {
    serde_json::from_str(&data(name)).unwrap()
}

fn table() -> Arc<MellinTable> {
    static TABLE: OnceLock<Arc<MellinTable>> = OnceLock::new();
    TABLE
        .get_or_init(|| Arc::new(MellinTable::new(1.5, ExecPolicy::Sequential).unwrap()))
        .clone()
}

fn small_system(cone: &PolyhedralCone, exec: ExecPolicy) -> NystromSystem {
    let mesh = build_mesh(&cone.cross_section, 3, 6, 2).unwrap();
    assemble_with(&mesh, table(), 0.5, exec).unwrap()
}

fn rotation() -> impl Strategy<Value = Rotation3<f64>> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, -PI..PI)
        .prop_filter("axis", |(x, y, z, _)| x * x + y * y + z * z > 1e-2)
        .prop_map(|(x, y, z, t)| Rotation3::from_axis_angle(&Unit::new_normalize(Vec3::new(x, y, z)), t))
}

fn rotated(c: &PolyhedralCone, r: &Rotation3<f64>) -> PolyhedralCone {
    let edges: Vec<Vec3> = c.edges.iter().map(|e| r * e).collect();
    cone_from_edges(&edges).unwrap()
}

fn partition(poly: &Polyhedron) -> Vec<Vec<usize>> {
    let mut classes: Vec<Vec<usize>> = congruence_classes(poly).into_iter().map(|c| c.1).collect();
    classes.sort();
    classes
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cone_geometry_is_rotation_invariant(r in rotation()) {
        for name in ["octant.json", "pyramid.json"] {
            let c = cone(name);
            let rc = rotated(&c, &r);
            for (a, b) in c.angles().iter().zip(rc.angles()) {
                prop_assert!((a - b).abs() < 1e-10);
            }
            prop_assert!((energy_radius(c.angles()) - energy_radius(rc.angles())).abs() < 1e-14);
            prop_assert_eq!(c.convex, rc.convex);
            prop_assert_eq!(c.lipschitz, rc.lipschitz);
        }
    }

    #[test]
    fn double_layer_matrix_is_rotation_invariant(r in rotation()) {
        let c = cone("octant.json");
        let a = small_system(&c, ExecPolicy::Sequential);
        let b = small_system(&rotated(&c, &r), ExecPolicy::Sequential);
        for i in 0..a.len() {
            for j in 0..a.len() {
                prop_assert!((a.a[(i, j)] - b.a[(i, j)]).norm() < 1e-9);
                prop_assert!((a.b[(i, j)] - b.b[(i, j)]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn congruence_survives_similarity(r in rotation(), scale in 0.1..10.0f64, shift in prop::array::uniform3(-5.0..5.0f64)) {
        for name in ["cube.json", "tetrahedron.json", "twobrick.json"] {
            let spec = poly_spec(name);
            let moved = PolyhedronSpec {
                vertices: spec
                    .vertices
                    .iter()
                    .map(|v| (r * Vec3::from(*v) * scale + Vec3::from(shift)).into())
                    .collect(),
                faces: spec.faces.clone(),
            };
            let p = Polyhedron::new(&spec).unwrap();
            let q = Polyhedron::new(&moved).unwrap();
            prop_assert_eq!(partition(&p), partition(&q));
            prop_assert_eq!(p.is_lipschitz(), q.is_lipschitz());
        }
    }

    #[test]
    fn mellin_reflection(re in 0.05..2.95f64, xi in -8.0..8.0f64, a in -1.0..0.999f64) {
        let w = C64::new(re, xi);
        let m = mellin_m3(w, a).unwrap().value;
        prop_assert!((m - mellin_m3(3.0 - w, a).unwrap().value).norm() < 1e-9 * m.norm());
        let w = C64::new(re / 3.0, xi);
        let m = mellin_m1(w, a).unwrap().value;
        prop_assert!((m - mellin_m1(1.0 - w, a).unwrap().value).norm() < 1e-9 * m.norm());
    }

    #[test]
    fn spectral_curve_symmetry(alpha in 0.0..0.99f64, beta in 0.05..(2.0 * PI - 0.05), xi in -20.0..20.0f64) {
        let s = sigma_point(alpha, beta, xi);
        prop_assert!((sigma_point(alpha, beta, -xi) - s.conj()).norm() < 1e-12);
        prop_assert!(s.norm() <= sigma_max(alpha, beta) + 1e-12);
        // Σ for 2π − β is the reflection −Σ
        prop_assert!((sigma_point(alpha, 2.0 * PI - beta, xi) + s).norm() < 1e-12);
    }
}

#[test]
fn scaling_keeps_tangent_cones() {
    let cube = Polyhedron::new(&poly_spec("cube.json")).unwrap();
    let big = cube.scaled(7.5).unwrap();
    for (a, b) in cube.tangent_cones.iter().zip(&big.tangent_cones) {
        assert_eq!(a.angles(), b.angles());
    }
    assert_eq!(partition(&cube), vec![(0..8).collect::<Vec<_>>()]);
}

#[test]
fn execution_policies_agree() {
    let c = cone("pyramid.json");
    let seq = small_system(&c, ExecPolicy::Sequential);
    let par = small_system(&c, ExecPolicy::Parallel);
    assert_eq!(seq.a, par.a);
    assert_eq!(seq.b, par.b);
    assert_eq!(seq.eigenvalues().unwrap(), par.eigenvalues().unwrap());
}
