use std::sync::{Arc, OnceLock};

use serde::Serialize;

use super::SpectraOptions;
use crate::geometry::{PolyhedralCone, SphericalPolygon};
use crate::mellin::MellinTable;
use crate::nystrom::{assemble_with, build_mesh, match_candidates, EigenFilter, MeshParams};
use crate::{Error, Result, C64};

/// How a branch ended.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Termination {
    /// Still above the threshold at the last sweep point.
    EndOfSweep,
    /// Dropped below the filtering threshold between the two `ξ` values.
    Absorbed { between: [f64; 2] },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub mesh: MeshParams,
    pub refined_panels: usize,
    pub threshold: f64,
}

/// An isolated eigenvalue `λ(ξ)` followed over `ξ ≥ 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenBranch {
    /// Tangent-cone vertex index (polyhedron reports) or 0.
    pub vertex_id: usize,
    pub alpha: f64,
    /// `(ξ, λ)` with `ξ` ascending.
    pub samples: Vec<(f64, f64)>,
    /// `|λ_fine − λ_coarse|` at each sample.
    pub agreement: Vec<f64>,
    pub termination: Termination,
    pub provenance: Provenance,
}

impl EigenBranch {
    pub fn max_abs(&self) -> f64 {
        self.samples.iter().map(|s| s.1.abs()).fold(0.0, f64::max)
    }

    /// Index of the sample with the largest `|λ|`.
    pub fn peak(&self) -> usize {
        (0..self.samples.len())
            .max_by(|&a, &b| self.samples[a].1.abs().total_cmp(&self.samples[b].1.abs()))
            .expect("branches are never empty")
    }

    pub fn range(&self) -> [f64; 2] {
        let lo = self.samples.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
        let hi = self.samples.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
        [lo, hi]
    }
}

/// Raw (unfiltered) spectra of the coarse and refined matrices at one `ξ`.
/// They do not depend on `α`, so one sweep serves every filter.
#[derive(Debug)]
pub struct RawPoint {
    pub xi: f64,
    pub coarse: Vec<C64>,
    pub refined: Vec<C64>,
    finer: OnceLock<std::result::Result<Vec<C64>, Error>>,
    table: Arc<MellinTable>,
}

/// Filtered eigenvalues at one `ξ` after cross-mesh validation.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredPoint {
    pub xi: f64,
    pub values: Vec<f64>,
    pub agreement: Vec<f64>,
    pub panels: [usize; 2],
}

struct Sweeper<'a> {
    polygon: &'a SphericalPolygon,
    opts: &'a SpectraOptions,
}

impl<'a> Sweeper<'a> {
    pub fn new(cone: &'a PolyhedralCone, opts: &'a SpectraOptions) -> Self {
        Sweeper {
            polygon: &cone.cross_section,
            opts,
        }
    }

    fn eigenvalues(&self, params: MeshParams, table: &Arc<MellinTable>) -> Result<Vec<C64>> {
        let mesh = build_mesh(self.polygon, params.panels_per_arc, params.gauss_order, params.grading_levels)?;
        let system = assemble_with(&mesh, table.clone(), 0.0, self.opts.exec)?;
        system.eigenvalues()
    }

    pub fn raw_point(&self, xi: f64) -> Result<RawPoint> {
        let table = Arc::new(MellinTable::new(xi, self.opts.exec)?);
        Ok(RawPoint {
            xi,
            coarse: self.eigenvalues(self.opts.mesh, &table)?,
            refined: self.eigenvalues(self.opts.mesh.refined(), &table)?,
            finer: OnceLock::new(),
            table,
        })
    }

    /// Raw points on the uniform grid `ξ_k = k·ξ_max/(steps−1)`.
    pub fn raw_grid(&self) -> Vec<(f64, Result<RawPoint>)> {
        let steps = self.opts.xi_steps;
        let xi_max = self.opts.xi_max;
        // the grid is parallelized over ξ; assembly inside runs on the same pool
        self.opts
            .exec
            .map_indexed(steps, |k| {
                let xi = xi_max * k as f64 / (steps - 1) as f64;
                (xi, self.raw_point(xi))
            })
    }

    pub fn filter(&self, raw: &RawPoint, filter: &EigenFilter) -> Result<FilteredPoint> {
        let coarse = self.opts.mesh.panels_per_arc;
        let refined = self.opts.mesh.refined().panels_per_arc;
        let m = match_candidates(&filter.candidates(&raw.coarse), &filter.candidates(&raw.refined), filter);
        if m.is_consistent() {
            return Ok(FilteredPoint {
                xi: raw.xi,
                values: m.pairs.iter().map(|p| p.0).collect(),
                agreement: m.pairs.iter().map(|p| p.1).collect(),
                panels: [coarse, refined],
            });
        }
        let finer_params = self.opts.mesh.with_panels(2 * refined);
        let finer = raw
            .finer
            .get_or_init(|| self.eigenvalues(finer_params, &raw.table))
            .as_ref()
            .map_err(Clone::clone)?;
        let retry = match_candidates(&filter.candidates(&raw.refined), &filter.candidates(finer), filter);
        if !retry.is_consistent() {
            return Err(Error::NoConvergence(format!(
                "ξ={}: {} eigenvalue(s) unmatched between {} and {} panels per arc",
                raw.xi,
                retry.unexplained,
                refined,
                2 * refined
            )));
        }
        Ok(FilteredPoint {
            xi: raw.xi,
            values: retry.pairs.iter().map(|p| p.0).collect(),
            agreement: retry.pairs.iter().map(|p| p.1).collect(),
            panels: [refined, 2 * refined],
        })
    }
}

/// Raw spectra of one cone over the `ξ` grid, reusable across filters.
#[derive(Debug)]
pub struct Sweep {
    cone: PolyhedralCone,
    opts: SpectraOptions,
    raw: Vec<(f64, Result<RawPoint>)>,
}

impl Sweep {
    pub fn run(cone: &PolyhedralCone, opts: &SpectraOptions) -> Result<Self> {
        opts.validate()?;
        let raw = Sweeper::new(cone, opts).raw_grid();
        Ok(Sweep {
            cone: cone.clone(),
            opts: opts.clone(),
            raw,
        })
    }

    /// `(ξ, raw point)` in grid order; failed assemblies are kept as errors.
    pub fn raw(&self) -> &[(f64, Result<RawPoint>)] {
        &self.raw
    }

    /// Raw point at an arbitrary `ξ` (off the grid, or `−ξ`).
    pub fn raw_point(&self, xi: f64) -> Result<RawPoint> {
        Sweeper::new(&self.cone, &self.opts).raw_point(xi)
    }

    pub fn filter(&self, raw: &RawPoint, filter: &EigenFilter) -> Result<FilteredPoint> {
        Sweeper::new(&self.cone, &self.opts).filter(raw, filter)
    }

    pub fn stitch(&self, filter: &EigenFilter, alpha: f64) -> SweepResult {
        stitch(&Sweeper::new(&self.cone, &self.opts), &self.raw, filter, alpha)
    }
}

/// Outcome of stitching one filter over a raw sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub branches: Vec<EigenBranch>,
    pub points: Vec<FilteredPoint>,
    pub failed: Vec<f64>,
    /// Largest `|λ|` among real eigenvalues in `(−1/2, 1/2)` at `ξ_max`.
    pub tail_max: f64,
    pub tail_certified: bool,
}

struct Open {
    samples: Vec<(f64, f64)>,
    agreement: Vec<f64>,
}

fn stitch(
    sweeper: &Sweeper,
    raw: &[(f64, Result<RawPoint>)],
    filter: &EigenFilter,
    alpha: f64,
) -> SweepResult {
    let opts = sweeper.opts;
    let provenance = Provenance {
        mesh: opts.mesh,
        refined_panels: opts.mesh.refined().panels_per_arc,
        threshold: filter.threshold,
    };
    let close = |open: Open, termination: Termination| EigenBranch {
        vertex_id: 0,
        alpha,
        samples: open.samples,
        agreement: open.agreement,
        termination,
        provenance: provenance.clone(),
    };
    let mut failed = Vec::new();
    let mut points = Vec::new();
    let mut open: Vec<Open> = Vec::new();
    let mut done: Vec<EigenBranch> = Vec::new();
    let mut last_xi: Option<f64> = None;
    for (grid_xi, point) in raw {
        let filtered = match point {
            Ok(p) => sweeper.filter(p, filter),
            Err(e) => Err(e.clone()),
        };
        let Ok(fp) = filtered else {
            failed.push(*grid_xi);
            continue;
        };
        let xi = fp.xi;
        let step = last_xi.map_or(0.0, |x| xi - x);
        let reach = opts.slope_cap * step + filter.tau_match;
        let mut pairs: Vec<(f64, usize, usize)> = open
            .iter()
            .enumerate()
            .flat_map(|(b, br)| {
                let last = br.samples.last().unwrap().1;
                fp.values.iter().enumerate().map(move |(v, &x)| ((x - last).abs(), b, v))
            })
            .filter(|&(d, _, _)| d <= reach)
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut branch_used = vec![false; open.len()];
        let mut value_used = vec![false; fp.values.len()];
        for (_, b, v) in pairs {
            if !branch_used[b] && !value_used[v] {
                branch_used[b] = true;
                value_used[v] = true;
                open[b].samples.push((xi, fp.values[v]));
                open[b].agreement.push(fp.agreement[v]);
            }
        }
        let mut still_open = Vec::new();
        for (b, br) in open.into_iter().enumerate() {
            if branch_used[b] {
                still_open.push(br);
            } else {
                let (br, between) = bisect_end(sweeper, filter, br, xi);
                done.push(close(br, Termination::Absorbed { between }));
            }
        }
        open = still_open;
        for (v, &x) in fp.values.iter().enumerate() {
            if !value_used[v] {
                open.push(Open {
                    samples: vec![(xi, x)],
                    agreement: vec![fp.agreement[v]],
                });
            }
        }
        points.push(fp);
        last_xi = Some(xi);
    }
    done.extend(open.into_iter().map(|b| close(b, Termination::EndOfSweep)));
    done.sort_by(|a, b| {
        a.samples[0]
            .0
            .total_cmp(&b.samples[0].0)
            .then(b.samples[0].1.total_cmp(&a.samples[0].1))
    });

    let tail_max = raw
        .iter()
        .rev()
        .find_map(|p| p.1.as_ref().ok())
        .map(|p| {
            p.refined
                .iter()
                .filter(|z| z.im.abs() < filter.tau_im && z.re.abs() < 0.5)
                .map(|z| z.re.abs())
                .fold(0.0, f64::max)
        })
        .unwrap_or(f64::NAN);
    SweepResult {
        branches: done,
        points,
        failed,
        tail_max,
        tail_certified: tail_max <= filter.cutoff(),
    }
}

/// Locates where a branch leaves the filtered set between its last sample
/// and `hi` by bisection, appending the samples found on the way.
fn bisect_end(sweeper: &Sweeper, filter: &EigenFilter, mut branch: Open, mut hi: f64) -> (Open, [f64; 2]) {
    let mut lo = branch.samples.last().unwrap().0;
    for _ in 0..sweeper.opts.bisection_steps {
        let mid = 0.5 * (lo + hi);
        let last = branch.samples.last().unwrap().1;
        let reach = sweeper.opts.slope_cap * (mid - lo) + filter.tau_match;
        let found = sweeper
            .raw_point(mid)
            .and_then(|raw| sweeper.filter(&raw, filter))
            .ok()
            .and_then(|fp| {
                (0..fp.values.len())
                    .filter(|&v| (fp.values[v] - last).abs() <= reach)
                    .min_by(|&a, &b| (fp.values[a] - last).abs().total_cmp(&(fp.values[b] - last).abs()))
                    .map(|v| (fp.values[v], fp.agreement[v]))
            });
        match found {
            Some((x, agreement)) => {
                branch.samples.push((mid, x));
                branch.agreement.push(agreement);
                lo = mid;
            }
            None => hi = mid,
        }
    }
    (branch, [lo, hi])
}
