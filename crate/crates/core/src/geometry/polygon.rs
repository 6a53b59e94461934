use std::f64::consts::PI;

use serde::Serialize;

use super::{normalized, oriented_angle, Vec3, GEOM_TOL};
use crate::{Error, Result};

/// Great-circle arc from `start` to `end`, shorter than π.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Arc {
    pub start: Vec3,
    pub end: Vec3,
    /// Unit tangent at `start` pointing along the arc.
    pub tangent: Vec3,
    /// Outward unit normal of the cone face containing the arc.
    pub face_normal: Vec3,
    pub length: f64,
}

impl Arc {
    fn new(start: Vec3, end: Vec3) -> Result<Self> {
        let cross = start.cross(&end);
        let sin = cross.norm();
        if sin < GEOM_TOL {
            return Err(Error::DegenerateGeometry(
                "consecutive edges are parallel or antiparallel".into(),
            ));
        }
        let length = sin.atan2(start.dot(&end));
        let tangent = (end - start * start.dot(&end)) / sin;
        Ok(Arc {
            start,
            end,
            tangent,
            face_normal: -cross / sin,
            length,
        })
    }

    /// Point at arc length `s` from `start`.
    pub fn point(&self, s: f64) -> Vec3 {
        self.start * s.cos() + self.tangent * s.sin()
    }

    /// Arc-length coordinate of a point on the arc's great circle, in (-π, π].
    fn coordinate(&self, x: &Vec3) -> f64 {
        x.dot(&self.tangent).atan2(x.dot(&self.start))
    }

    fn contains(&self, x: &Vec3, tol: f64) -> bool {
        let t = self.coordinate(x);
        t >= -tol && t <= self.length + tol
    }
}

/// Weight `q` on the polygon: arc distance to the nearest corner within the
/// cutoff, blended (C¹) to a constant plateau `2 · cutoff` further away.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightFunction {
    pub cutoff: f64,
}

impl WeightFunction {
    pub fn value(&self, corner_distance: f64) -> f64 {
        let t = corner_distance / self.cutoff;
        let shaped = if t <= 1.0 {
            t
        } else if t < 3.0 {
            t - 0.25 * (t - 1.0) * (t - 1.0)
        } else {
            2.0
        };
        self.cutoff * shaped
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SphericalPolygon {
    pub corners: Vec<Vec3>,
    pub arcs: Vec<Arc>,
    /// Interior angle at each corner, measured through the cone interior.
    pub angles: Vec<f64>,
    pub weight: WeightFunction,
}

/// A point on the polygon together with the data the kernels need.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcPoint {
    pub arc: usize,
    pub s: f64,
    pub point: Vec3,
    pub normal: Vec3,
    pub q: f64,
}

impl SphericalPolygon {
    /// Builds the polygon through `corners` (normalized here), checking that
    /// arcs are proper, angles lie strictly inside `(0, 2π)`, and the curve is
    /// simple.
    pub fn new(corners: &[Vec3]) -> Result<Self> {
        if corners.len() < 3 {
            return Err(Error::DegenerateGeometry(format!(
                "a cone needs at least 3 edges, got {}",
                corners.len()
            )));
        }
        let corners = corners
            .iter()
            .map(|c| normalized(c, "edge direction"))
            .collect::<Result<Vec<_>>>()?;
        let j = corners.len();
        let arcs = (0..j)
            .map(|i| Arc::new(corners[i], corners[(i + 1) % j]))
            .collect::<Result<Vec<_>>>()?;
        let angles = (0..j)
            .map(|i| {
                let incoming = &arcs[(i + j - 1) % j];
                let outgoing = &arcs[i];
                let corner = &corners[i];
                // tangent at the corner pointing back along the incoming arc
                let back = incoming.start - corner * corner.dot(&incoming.start);
                let back = back / back.norm();
                oriented_angle(&outgoing.tangent, &back, corner)
            })
            .collect::<Vec<_>>();
        if let Some((i, b)) = angles
            .iter()
            .enumerate()
            .find(|(_, &b)| !(GEOM_TOL..=2.0 * PI - GEOM_TOL).contains(&b))
        {
            return Err(Error::DegenerateGeometry(format!(
                "interior angle {b} at corner {i} is degenerate"
            )));
        }
        let shortest = arcs.iter().map(|a| a.length).fold(f64::INFINITY, f64::min);
        let polygon = SphericalPolygon {
            corners,
            arcs,
            angles,
            weight: WeightFunction {
                cutoff: shortest / 3.0,
            },
        };
        polygon.check_simple()?;
        Ok(polygon)
    }

    pub fn len(&self) -> usize {
        self.corners.len()
    }

    pub fn is_empty(&self) -> bool {
        self.corners.is_empty()
    }

    pub fn arc_lengths(&self) -> Vec<f64> {
        self.arcs.iter().map(|a| a.length).collect()
    }

    pub fn perimeter(&self) -> f64 {
        self.arcs.iter().map(|a| a.length).sum()
    }

    /// Weight `q` at arc length `s` along arc `j`.
    pub fn q(&self, j: usize, s: f64) -> f64 {
        let d = s.min(self.arcs[j].length - s).max(0.0);
        self.weight.value(d)
    }

    fn check_simple(&self) -> Result<()> {
        let j = self.len();
        for a in 0..j {
            for b in (a + 1)..j {
                let adjacent = b == a + 1 || (a == 0 && b == j - 1);
                if adjacent {
                    continue;
                }
                if arcs_intersect(&self.arcs[a], &self.arcs[b]) {
                    return Err(Error::SelfIntersecting(format!("arcs {a} and {b} meet")));
                }
            }
        }
        Ok(())
    }
}

fn arcs_intersect(a: &Arc, b: &Arc) -> bool {
    let tol = 1e-12;
    let line = a.face_normal.cross(&b.face_normal);
    if line.norm() < GEOM_TOL {
        // same great circle: overlap iff an endpoint of one lies on the other
        return a.contains(&b.start, tol)
            || a.contains(&b.end, tol)
            || b.contains(&a.start, tol)
            || b.contains(&a.end, tol);
    }
    let p = line / line.norm();
    [p, -p]
        .iter()
        .any(|x| a.contains(x, tol) && b.contains(x, tol))
}

/// Point on arc `j` at arc distance `s` from its starting corner, with the
/// outward face normal and the weight value there.
pub fn arc_point(polygon: &SphericalPolygon, j: usize, s: f64) -> Result<ArcPoint> {
    let arc = polygon
        .arcs
        .get(j)
        .ok_or_else(|| Error::InvalidParams(format!("arc index {j} out of range")))?;
    if !(0.0..=arc.length).contains(&s) {
        return Err(Error::OutOfRange {
            arc: j,
            s,
            len: arc.length,
        });
    }
    Ok(ArcPoint {
        arc: j,
        s,
        point: arc.point(s),
        normal: arc.face_normal,
        q: polygon.q(j, s),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn octant() -> SphericalPolygon {
        SphericalPolygon::new(&[Vec3::x(), Vec3::y(), Vec3::z()]).unwrap()
    }

    #[test]
    fn octant_arcs_and_normals() {
        let p = octant();
        for arc in &p.arcs {
            assert!((arc.length - FRAC_PI_2).abs() < 1e-15);
            assert!(arc.face_normal.dot(&arc.start).abs() < 1e-15);
            // outward: away from the interior direction (1,1,1)
            assert!(arc.face_normal.dot(&Vec3::new(1.0, 1.0, 1.0)) < 0.0);
        }
        assert_eq!(p.arcs[0].face_normal, -Vec3::z());
        for b in &p.angles {
            assert!((b - FRAC_PI_2).abs() < 1e-14);
        }
    }

    #[test]
    fn reversed_orientation_is_the_complement() {
        let p = SphericalPolygon::new(&[Vec3::z(), Vec3::y(), Vec3::x()]).unwrap();
        for b in &p.angles {
            assert!((b - 3.0 * FRAC_PI_2).abs() < 1e-14);
        }
    }

    #[test]
    fn arc_point_examples() {
        // arc from (0,0,1) to (1,0,0)
        let p = SphericalPolygon::new(&[Vec3::z(), Vec3::x(), Vec3::y()]);
        let p = p.unwrap();
        let mid = arc_point(&p, 0, std::f64::consts::FRAC_PI_4).unwrap();
        let h = 0.5f64.sqrt();
        assert!((mid.point - Vec3::new(h, 0.0, h)).norm() < 1e-15);
        let corner = arc_point(&p, 0, 0.0).unwrap();
        assert_eq!(corner.point, Vec3::z());
        assert_eq!(corner.q, 0.0);
        let near = arc_point(&p, 0, PI / 8.0).unwrap();
        assert!((near.q - PI / 8.0).abs() < 1e-15);
        assert!(matches!(
            arc_point(&p, 0, 2.0),
            Err(Error::OutOfRange { arc: 0, .. })
        ));
        assert!(arc_point(&p, 0, -1e-9).is_err());
    }

    #[test]
    fn weight_is_positive_and_lipschitz() {
        let p = octant();
        let c = p.weight.cutoff;
        assert!((c - FRAC_PI_2 / 3.0).abs() < 1e-15);
        let n = 2000;
        let mut prev = p.q(0, 0.0);
        for k in 1..=n {
            let s = FRAC_PI_2 * k as f64 / n as f64;
            let q = p.q(0, s);
            if k < n {
                assert!(q > 0.0);
            }
            assert!((q - prev).abs() <= FRAC_PI_2 / n as f64 + 1e-15);
            prev = q;
        }
        assert_eq!(p.q(0, FRAC_PI_2), 0.0);
    }

    #[test]
    fn rejects_bad_polygons() {
        assert!(matches!(
            SphericalPolygon::new(&[Vec3::x(), Vec3::y()]),
            Err(Error::DegenerateGeometry(_))
        ));
        assert!(matches!(
            SphericalPolygon::new(&[Vec3::x(), Vec3::x() * 2.0, Vec3::z()]),
            Err(Error::DegenerateGeometry(_))
        ));
        // bow-tie: the arcs 0→1 and 2→3 cross
        let bow = [
            Vec3::new(1.0, 1.0, 1.0),
            Vec3::new(-1.0, -1.0, 1.0),
            Vec3::new(-1.0, 1.0, 1.0),
            Vec3::new(1.0, -1.0, 1.0),
        ];
        assert!(matches!(
            SphericalPolygon::new(&bow),
            Err(Error::SelfIntersecting(_))
        ));
    }
}
