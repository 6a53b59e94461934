use super::*;
use crate::curves::sigma_max;
use crate::geometry::{ConeSpec, PolyhedronSpec};
use std::f64::consts::FRAC_PI_2;

fn cone(json: &str) -> PolyhedralCone {
    serde_json::from_str::<ConeSpec>(json).unwrap().build().unwrap()
}

fn poly(json: &str) -> Polyhedron {
    Polyhedron::new(&serde_json::from_str::<PolyhedronSpec>(json).unwrap()).unwrap()
}

fn octant() -> PolyhedralCone {
    cone(include_str!("../../../cli/data/octant.json"))
}

fn quick() -> SpectraOptions {
    SpectraOptions {
        mesh: MeshParams::default().with_panels(6),
        xi_steps: 9,
        ..SpectraOptions::default()
    }
}

#[test]
fn octant_energy_report() {
    let report = cone_energy_spectrum(&octant(), &quick()).unwrap();
    assert_eq!(report.essential_core.intervals, vec![[-0.25, 0.25]]);
    let mu = report.mu_plus.unwrap();
    assert!((mu.value - 0.34726).abs() < 0.01, "{mu:?}");
    assert_eq!(mu.xi, 0.0);
    assert!(mu.value < 0.5 && mu.value >= 0.25);
    assert!(mu.uncertainty > 0.0 && mu.uncertainty < 0.01);
    assert!(report.mu_minus.is_none());
    assert!(report.caveats.iter().any(|c| c.contains("convexity shortcut")));
    assert!(report.caveats.iter().any(|c| c.starts_with("mu_minus not detected")));
    assert_eq!(
        report.lambda_star_intervals,
        vec![RealInterval {
            lo: 0.25,
            hi: mu.value,
            lo_closed: false,
            hi_closed: true
        }]
    );
    assert!(report.sweeps.iter().all(|s| s.tail_certified && s.failed_xi.is_empty()));
}

#[test]
fn pyramid_core_is_exact() {
    let pyramid = cone(include_str!("../../../cli/data/pyramid.json"));
    assert_eq!(energy_radius(pyramid.angles()), (1.0 - 2.0 / 3.0) / 2.0);
    assert!((energy_radius(pyramid.angles()) - 1.0 / 6.0).abs() < 1e-15);
}

#[test]
fn branch_invariants() {
    let opts = quick();
    let res = sweep_branches(&octant(), 0.9, &opts).unwrap();
    let filter = EigenFilter::weighted(&[FRAC_PI_2; 3], 0.9);
    assert!(!res.branches.is_empty());
    for b in &res.branches {
        assert_eq!(b.samples.len(), b.agreement.len());
        for w in b.samples.windows(2) {
            assert!(w[1].0 > w[0].0);
            assert!((w[1].1 - w[0].1).abs() <= opts.slope_cap * (w[1].0 - w[0].0) + filter.tau_match);
        }
        for &(_, l) in &b.samples {
            assert!(l.abs() < 0.5 && l.abs() > filter.threshold);
        }
    }
    // the top branch starts at ξ = 0, decays and is absorbed
    let top = &res.branches[0];
    assert_eq!(top.samples[0].0, 0.0);
    assert!(matches!(top.termination, Termination::Absorbed { .. }));
    assert!(top.samples.windows(2).all(|w| w[1].1 < w[0].1));
    if let Termination::Absorbed { between } = top.termination {
        assert!(between[1] - between[0] <= opts.xi_max / 8.0 / 16.0 + 1e-12);
    }
}

#[test]
fn sweep_options_validated() {
    let bad = SpectraOptions {
        xi_steps: 4,
        ..quick()
    };
    assert!(matches!(sweep_branches(&octant(), 0.9, &bad), Err(Error::InvalidParams(_))));
    assert!(matches!(sweep_branches(&octant(), 1.0, &quick()), Err(Error::InvalidParams(_))));
}

#[test]
fn octant_weighted_report() {
    let report = cone_weighted_spectrum(&octant(), 0.5, &quick()).unwrap();
    let radius = sigma_max(0.5, FRAC_PI_2);
    assert_eq!(report.essential_core.kind, RegionKind::CurveUnion);
    assert_eq!(report.essential_core.curves.len(), 6);
    let outer = report.outer_bracket.as_ref().unwrap();
    assert_eq!(outer.disk_radius, Some(radius));
    assert!(report.caveats.iter().any(|c| c.contains("not characterized")));
    // Λ^α contains the ξ = 0 eigenvalue
    assert!(report.essential_core.contains_real(report.mu_plus.unwrap().value));
}

#[test]
fn lambda_alpha_increases_with_alpha() {
    let opts = quick();
    let low = cone_weighted_spectrum(&octant(), 0.0, &opts).unwrap();
    let high = cone_weighted_spectrum(&octant(), 0.9, &opts).unwrap();
    for iv in &low.essential_core.intervals {
        assert!(high.essential_core.intervals.iter().any(|h| h[0] <= iv[0] + 1e-3 && iv[1] <= h[1] + 1e-3));
    }
}

#[test]
fn two_brick_needs_weighted_space() {
    let p = poly(include_str!("../../../cli/data/twobrick.json"));
    assert!(!p.is_lipschitz());
    let bad: Vec<usize> = (0..p.tangent_cones.len()).filter(|&v| !p.tangent_cones[v].lipschitz).collect();
    assert_eq!(bad.len(), 1);
    assert_eq!(p.vertices[bad[0]], crate::geometry::Vec3::new(1.0, 1.0, 1.0));
    assert!(matches!(
        polyhedron_essential_spectrum(&p, Space::Energy, &quick()),
        Err(Error::NotLipschitz(_))
    ));
    assert!(matches!(cone_energy_spectrum(&p.tangent_cones[bad[0]], &quick()), Err(Error::NotLipschitz(_))));
}

#[test]
fn cube_classes_and_union() {
    let cube = poly(include_str!("../../../cli/data/cube.json"));
    let classes = congruence_classes(&cube);
    assert_eq!(classes.len(), 1);
    assert_eq!(classes[0].1, (0..8).collect::<Vec<_>>());
    let opts = quick();
    let union = polyhedron_essential_spectrum(&cube, Space::Energy, &opts).unwrap();
    let single = cone_energy_spectrum(&octant(), &opts).unwrap();
    assert_eq!(union.essential_core, single.essential_core);
    assert_eq!(union.per_vertex.len(), 8);
    let (a, b) = (union.mu_plus.unwrap(), single.mu_plus.unwrap());
    assert!((a.value - b.value).abs() < 1e-9);
    assert_eq!(union.mu_minus, None);
    assert_eq!(union.branches.len(), single.branches.len());
    assert!(union.per_vertex.values().all(|r| r.mu_plus == union.mu_plus));
}

#[test]
fn tetrahedron_cones_are_congruent() {
    let tet = poly(include_str!("../../../cli/data/tetrahedron.json"));
    assert_eq!(congruence_classes(&tet).len(), 1);
    let octant_like = [octant(), cone(include_str!("../../../cli/data/pyramid.json"))];
    assert!(!keys_match(&congruence_key(&octant_like[0]), &congruence_key(&octant_like[1])));
}
