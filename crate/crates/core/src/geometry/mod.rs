//! Polyhedral cones, their spherical cross-sections, and bounded polyhedra.
//!
//! Orientation convention: a cone's edges are listed so that the cone
//! interior lies to the left of the cross-section polygon when the unit
//! sphere is viewed from outside (counter-clockwise around the interior).
//! Polyhedron faces are counter-clockwise when viewed from outside the solid.

mod cone;
mod polygon;
mod polyhedron;

pub use cone::{cone_from_edges, is_lipschitz, LipschitzCheck, PolyhedralCone};
pub use polygon::{arc_point, Arc, ArcPoint, SphericalPolygon, WeightFunction};
pub use polyhedron::{tangent_cones, ConeSpec, Polyhedron, PolyhedronSpec};

pub type Vec3 = nalgebra::Vector3<f64>;

/// Unit-norm and orthogonality tolerance for geometric checks.
pub const GEOM_TOL: f64 = 1e-10;

pub(crate) fn normalized(v: &Vec3, what: &str) -> crate::Result<Vec3> {
    let n = v.norm();
    if !n.is_finite() || n < GEOM_TOL {
        return Err(crate::Error::DegenerateGeometry(format!(
            "{what} has zero or non-finite length"
        )));
    }
    Ok(v / n)
}

/// Angle in `[0, 2π)` from `from` to `to`, counter-clockwise about `axis`.
pub(crate) fn oriented_angle(from: &Vec3, to: &Vec3, axis: &Vec3) -> f64 {
    let a = axis.dot(&from.cross(to)).atan2(from.dot(to));
    if a < 0.0 {
        a + std::f64::consts::TAU
    } else {
        a
    }
}
