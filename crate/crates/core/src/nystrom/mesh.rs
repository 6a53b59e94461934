use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::geometry::{arc_point, ArcPoint, SphericalPolygon};
use crate::quadrature::gauss_legendre;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeshParams {
    pub panels_per_arc: usize,
    pub gauss_order: usize,
    pub grading_levels: usize,
}

impl Default for MeshParams {
    fn default() -> Self {
        MeshParams {
            panels_per_arc: 16,
            gauss_order: 10,
            grading_levels: 4,
        }
    }
}

impl MeshParams {
    /// Same order and grading with `panels` panels per arc.
    pub fn with_panels(self, panels: usize) -> Self {
        MeshParams {
            panels_per_arc: panels,
            ..self
        }
    }

    /// The companion mesh used to validate eigenvalues: 1.5× the panels.
    pub fn refined(self) -> Self {
        self.with_panels((3 * self.panels_per_arc).div_ceil(2))
    }

    pub fn validate(&self) -> Result<()> {
        if self.panels_per_arc < 2 {
            return Err(Error::InvalidParams(format!(
                "panels per arc must be at least 2, got {}",
                self.panels_per_arc
            )));
        }
        if !(4..=32).contains(&self.gauss_order) {
            return Err(Error::InvalidParams(format!(
                "Gauss order must lie in [4, 32], got {}",
                self.gauss_order
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshNode {
    pub panel: usize,
    pub weight: f64,
    pub at: ArcPoint,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub polygon: SphericalPolygon,
    pub params: MeshParams,
    /// Nodes ordered by arc, then panel, then Gauss node.
    pub nodes: Vec<MeshNode>,
    /// Panel end points (arc length) on each arc.
    pub panel_breaks: Vec<Vec<f64>>,
}

impl Mesh {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Node index range of panel `panel` on arc `arc`.
    pub fn panel_nodes(&self, arc: usize, panel: usize) -> Range<usize> {
        let g = self.params.gauss_order;
        let start = (arc * self.params.panels_per_arc + panel) * g;
        start..start + g
    }

    pub fn weights(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.weight).collect()
    }
}

/// Relative panel widths on `[0, 1]`: widths double away from each corner
/// for `levels` steps, then stay constant.
fn graded_breaks(panels: usize, levels: usize) -> Vec<f64> {
    let widths: Vec<f64> = (0..panels)
        .map(|i| {
            let depth = i.min(panels - 1 - i).min(levels);
            2f64.powi(depth as i32)
        })
        .collect();
    let total: f64 = widths.iter().sum();
    let mut breaks = Vec::with_capacity(panels + 1);
    breaks.push(0.0);
    let mut acc = 0.0;
    for w in &widths[..panels - 1] {
        acc += w;
        breaks.push(acc / total);
    }
    breaks.push(1.0);
    breaks
}

/// Composite Gauss–Legendre mesh, graded toward both corners of every arc.
pub fn build_mesh(
    polygon: &SphericalPolygon,
    panels_per_arc: usize,
    gauss_order: usize,
    grading_levels: usize,
) -> Result<Mesh> {
    let params = MeshParams {
        panels_per_arc,
        gauss_order,
        grading_levels,
    };
    params.validate()?;
    let rule = gauss_legendre(gauss_order);
    let relative = graded_breaks(panels_per_arc, grading_levels);
    let mut nodes = Vec::with_capacity(polygon.len() * panels_per_arc * gauss_order);
    let mut panel_breaks = Vec::with_capacity(polygon.len());
    for (j, arc) in polygon.arcs.iter().enumerate() {
        let breaks: Vec<f64> = relative.iter().map(|r| r * arc.length).collect();
        for (p, pair) in breaks.windows(2).enumerate() {
            let mid = 0.5 * (pair[0] + pair[1]);
            let half = 0.5 * (pair[1] - pair[0]);
            for &(x, w) in &rule {
                nodes.push(MeshNode {
                    panel: p,
                    weight: half * w,
                    at: arc_point(polygon, j, mid + half * x)?,
                });
            }
        }
        panel_breaks.push(breaks);
    }
    Ok(Mesh {
        polygon: polygon.clone(),
        params,
        nodes,
        panel_breaks,
    })
}
