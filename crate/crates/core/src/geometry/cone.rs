use std::f64::consts::TAU;

use serde::Serialize;

use super::{SphericalPolygon, Vec3, GEOM_TOL};
use crate::Result;

const SEMICIRCLES: usize = 720;
const TRANSVERSAL_TOL: f64 = 1e-6;

/// How the Lipschitz flag was decided.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum LipschitzCheck {
    /// Convex cones are graphs over their axis; no sampling needed.
    Convex,
    /// Radial graph property verified on sampled semicircles around `axis`.
    SampledAxis { axis: [f64; 3] },
    /// No candidate axis passed the sampled test.
    NoAxisFound,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolyhedralCone {
    /// Unit edge directions, counter-clockwise around the interior.
    pub edges: Vec<Vec3>,
    /// Outward unit normal of the face spanned by `edges[j]` and `edges[j+1]`.
    pub face_normals: Vec<Vec3>,
    pub cross_section: SphericalPolygon,
    pub convex: bool,
    pub lipschitz: bool,
    pub lipschitz_check: LipschitzCheck,
}

impl PolyhedralCone {
    /// Interior (dihedral) angles along each edge.
    pub fn angles(&self) -> &[f64] {
        &self.cross_section.angles
    }
}

/// Builds a cone from cyclically ordered edge directions.
pub fn cone_from_edges(edges: &[Vec3]) -> Result<PolyhedralCone> {
    let cross_section = SphericalPolygon::new(edges)?;
    let edges = cross_section.corners.clone();
    let face_normals: Vec<Vec3> = cross_section.arcs.iter().map(|a| a.face_normal).collect();
    let convex = face_normals
        .iter()
        .all(|n| edges.iter().all(|e| e.dot(n) <= GEOM_TOL));
    let mut cone = PolyhedralCone {
        edges,
        face_normals,
        cross_section,
        convex,
        lipschitz: false,
        lipschitz_check: LipschitzCheck::NoAxisFound,
    };
    let check = lipschitz_check(&cone);
    cone.lipschitz = !matches!(check, LipschitzCheck::NoAxisFound);
    cone.lipschitz_check = check;
    Ok(cone)
}

/// Radial-graph test: some axis `u` must see every great semicircle from
/// `u` to `-u` cross the cross-section exactly once. Convex cones pass
/// without sampling; otherwise a fixed candidate set of axes is tried.
pub fn is_lipschitz(cone: &PolyhedralCone) -> bool {
    !matches!(lipschitz_check(cone), LipschitzCheck::NoAxisFound)
}

fn lipschitz_check(cone: &PolyhedralCone) -> LipschitzCheck {
    if cone.convex {
        return LipschitzCheck::Convex;
    }
    candidate_axes(cone)
        .into_iter()
        .find(|u| is_radial_graph(&cone.cross_section, u))
        .map(|u| LipschitzCheck::SampledAxis {
            axis: [u.x, u.y, u.z],
        })
        .unwrap_or(LipschitzCheck::NoAxisFound)
}

fn candidate_axes(cone: &PolyhedralCone) -> Vec<Vec3> {
    let mut axes = Vec::with_capacity(28);
    let edge_sum: Vec3 = cone.edges.iter().sum();
    let normal_sum: Vec3 = cone.face_normals.iter().sum();
    for v in [edge_sum, -normal_sum] {
        if v.norm() > GEOM_TOL {
            axes.push(v.normalize());
        }
    }
    for x in -1i32..=1 {
        for y in -1i32..=1 {
            for z in -1i32..=1 {
                if (x, y, z) != (0, 0, 0) {
                    axes.push(Vec3::new(x as f64, y as f64, z as f64).normalize());
                }
            }
        }
    }
    axes
}

fn is_radial_graph(polygon: &SphericalPolygon, axis: &Vec3) -> bool {
    // a graph needs every face transversal to the axis, all on the same side
    let slopes: Vec<f64> = polygon.arcs.iter().map(|a| a.face_normal.dot(axis)).collect();
    if !(slopes.iter().all(|&s| s > TRANSVERSAL_TOL) || slopes.iter().all(|&s| s < -TRANSVERSAL_TOL)) {
        return false;
    }
    let helper = if axis.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let e1 = axis.cross(&helper).normalize();
    let e2 = axis.cross(&e1);
    // offset keeps the sampled semicircles off lattice-aligned corners
    let offset = 0.001_234_567;
    (0..SEMICIRCLES).all(|k| {
        let phi = TAU * (k as f64 + 0.5) / SEMICIRCLES as f64 + offset;
        let dir = e1 * phi.cos() + e2 * phi.sin();
        semicircle_crossings(polygon, axis, &dir) == Some(1)
    })
}

/// Number of crossings of the polygon with the open semicircle from `axis`
/// to `-axis` through `dir`; `None` if the polygon passes through `±axis`.
fn semicircle_crossings(polygon: &SphericalPolygon, axis: &Vec3, dir: &Vec3) -> Option<usize> {
    let plane = axis.cross(dir);
    let mut count = 0;
    for arc in &polygon.arcs {
        let s0 = plane.dot(&arc.start);
        let s1 = plane.dot(&arc.end);
        if s0 * s1 > 0.0 {
            continue;
        }
        if s0 == 0.0 && s1 == 0.0 {
            // arc lies in the sampling plane; treat as a failed sample
            return None;
        }
        let line = (-arc.face_normal).cross(&plane);
        let norm = line.norm();
        if norm < 1e-14 {
            return None;
        }
        let p = line / norm;
        let t = p.dot(&arc.tangent).atan2(p.dot(&arc.start));
        let x = if (-1e-12..=arc.length + 1e-12).contains(&t) { p } else { -p };
        if (x.dot(axis)).abs() > 1.0 - 1e-14 {
            return None;
        }
        if x.dot(dir) > 0.0 {
            count += 1;
        }
    }
    Some(count)
}
