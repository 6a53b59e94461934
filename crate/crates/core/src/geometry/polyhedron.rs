use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Rotation3, Unit};
use serde::{Deserialize, Serialize};

use super::{cone_from_edges, normalized, oriented_angle, PolyhedralCone, Vec3, GEOM_TOL};
use crate::{Error, Result};

/// Cone geometry file: `{"edges": [[x,y,z], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeSpec {
    pub edges: Vec<[f64; 3]>,
}

impl ConeSpec {
    pub fn build(&self) -> Result<PolyhedralCone> {
        let edges: Vec<Vec3> = self.edges.iter().map(|e| Vec3::from(*e)).collect();
        cone_from_edges(&edges)
    }
}

/// Polyhedron geometry file: `{"vertices": [[x,y,z], ...], "faces": [[i0,i1,...], ...]}`
/// with faces counter-clockwise seen from outside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyhedronSpec {
    pub vertices: Vec<[f64; 3]>,
    pub faces: Vec<Vec<usize>>,
}

#[derive(Debug, Clone)]
pub struct Polyhedron {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<Vec<usize>>,
    pub tangent_cones: Vec<PolyhedralCone>,
}

impl Polyhedron {
    /// Validates the face complex and builds one tangent cone per vertex.
    pub fn new(spec: &PolyhedronSpec) -> Result<Self> {
        let vertices: Vec<Vec3> = spec.vertices.iter().map(|v| Vec3::from(*v)).collect();
        let faces = spec.faces.clone();
        validate(&vertices, &faces)?;
        let mut poly = Polyhedron {
            vertices,
            faces,
            tangent_cones: Vec::new(),
        };
        poly.tangent_cones = tangent_cones(&poly)?;
        Ok(poly)
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Polyhedron::new(&PolyhedronSpec {
            vertices: self.vertices.iter().map(|v| (v * factor).into()).collect(),
            faces: self.faces.clone(),
        })
    }

    pub fn is_lipschitz(&self) -> bool {
        self.tangent_cones.iter().all(|c| c.lipschitz)
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidMesh(msg.into())
}

fn newell_normal(vertices: &[Vec3], face: &[usize]) -> Vec3 {
    let n = face.len();
    (0..n).fold(Vec3::zeros(), |acc, i| {
        let a = vertices[face[i]];
        let b = vertices[face[(i + 1) % n]];
        acc + a.cross(&b)
    })
}

fn validate(vertices: &[Vec3], faces: &[Vec<usize>]) -> Result<()> {
    if vertices.len() < 4 || faces.len() < 4 {
        return Err(invalid("a closed polyhedron needs at least 4 vertices and 4 faces"));
    }
    if vertices.iter().any(|v| !v.iter().all(|c| c.is_finite())) {
        return Err(invalid("non-finite vertex coordinate"));
    }
    let extent = vertices
        .iter()
        .flat_map(|a| vertices.iter().map(move |b| (a - b).norm()))
        .fold(0.0, f64::max);
    let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
    let mut used = vec![false; vertices.len()];
    for (fi, face) in faces.iter().enumerate() {
        if face.len() < 3 {
            return Err(invalid(format!("face {fi} has fewer than 3 vertices")));
        }
        if let Some(&bad) = face.iter().find(|&&i| i >= vertices.len()) {
            return Err(invalid(format!("face {fi} references missing vertex {bad}")));
        }
        let mut sorted = face.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != face.len() {
            return Err(invalid(format!("face {fi} repeats a vertex")));
        }
        let normal = newell_normal(vertices, face);
        if normal.norm() < GEOM_TOL * extent * extent {
            return Err(invalid(format!("face {fi} has zero area")));
        }
        let unit = normal.normalize();
        let origin = vertices[face[0]];
        if face
            .iter()
            .any(|&i| (vertices[i] - origin).dot(&unit).abs() > 1e-9 * extent)
        {
            return Err(invalid(format!("face {fi} is not planar")));
        }
        for k in 0..face.len() {
            let e = (face[k], face[(k + 1) % face.len()]);
            *directed.entry(e).or_default() += 1;
            used[face[k]] = true;
        }
    }
    if let Some(v) = used.iter().position(|u| !u) {
        return Err(invalid(format!("vertex {v} belongs to no face")));
    }
    for (&(a, b), &count) in &directed {
        if count != 1 {
            return Err(invalid(format!("edge {a}->{b} is used {count} times with the same orientation")));
        }
        if directed.get(&(b, a)) != Some(&1) {
            return Err(invalid(format!(
                "edge {a}-{b} is not shared by exactly two oppositely oriented faces"
            )));
        }
    }
    let volume: f64 = faces
        .iter()
        .map(|f| {
            let p0 = vertices[f[0]];
            (1..f.len() - 1)
                .map(|k| p0.dot(&vertices[f[k]].cross(&vertices[f[k + 1]])))
                .sum::<f64>()
        })
        .sum::<f64>()
        / 6.0;
    if volume <= 0.0 {
        return Err(invalid("faces are oriented inward (non-positive enclosed volume)"));
    }
    Ok(())
}

/// Tangent cone at every vertex. Cone edges are the directions of the
/// incident polyhedron edges in counter-clockwise order; face wedges of
/// angle π or more (a vertex sitting on a straight face boundary, or a
/// reflex face corner) receive extra in-face directions so every arc of the
/// cross-section stays shorter than π. The extra corners have angle π.
pub fn tangent_cones(poly: &Polyhedron) -> Result<Vec<PolyhedralCone>> {
    (0..poly.vertices.len())
        .map(|v| tangent_cone(poly, v))
        .collect()
}

fn tangent_cone(poly: &Polyhedron, v: usize) -> Result<PolyhedralCone> {
    let origin = poly.vertices[v];
    // successor map on neighbor vertices: previous -> next around each face
    let mut succ: HashMap<usize, (usize, usize)> = HashMap::new();
    for (fi, face) in poly.faces.iter().enumerate() {
        if let Some(k) = face.iter().position(|&i| i == v) {
            let n = face.len();
            let prev = face[(k + n - 1) % n];
            let next = face[(k + 1) % n];
            if succ.insert(prev, (next, fi)).is_some() {
                return Err(invalid(format!("vertex {v} has a non-manifold neighborhood")));
            }
        }
    }
    let start = *succ
        .keys()
        .min()
        .ok_or_else(|| invalid(format!("vertex {v} is isolated")))?;
    let mut directions = Vec::new();
    let mut current = start;
    for _ in 0..succ.len() {
        let (next, face) = succ[&current];
        let from = normalized(&(poly.vertices[current] - origin), "polyhedron edge")?;
        let to = normalized(&(poly.vertices[next] - origin), "polyhedron edge")?;
        let normal = newell_normal(&poly.vertices, &poly.faces[face]).normalize();
        directions.push(from);
        // wedge angle measured from `to` back to `from` through the face
        let wedge = oriented_angle(&to, &from, &normal);
        if wedge >= PI - GEOM_TOL {
            let pieces = (wedge / (FRAC_PI_2 + 1e-9)).ceil() as usize;
            let axis = Unit::new_normalize(normal);
            for i in 1..pieces {
                let angle = wedge * (pieces - i) as f64 / pieces as f64;
                directions.push(Rotation3::from_axis_angle(&axis, angle) * to);
            }
        }
        current = next;
        if current == start {
            break;
        }
    }
    if current != start {
        return Err(invalid(format!("the link of vertex {v} is not a single cycle")));
    }
    let visited = {
        let mut n = 0;
        let mut c = start;
        loop {
            n += 1;
            c = succ[&c].0;
            if c == start {
                break n;
            }
        }
    };
    if visited != succ.len() {
        return Err(invalid(format!("the link of vertex {v} is not a single cycle")));
    }
    cone_from_edges(&directions)
}
