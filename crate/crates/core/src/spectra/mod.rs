//! Spectrum reports for cones and polyhedra.
//!
//! A report combines the closed-form essential spectrum (from the corner
//! angles) with isolated eigenvalue branches `λ(ξ)` of `H(iξ)` found by a
//! sweep over `ξ ∈ [0, ξ_max]`. Energy-space reports bound the spectrum by
//! `[−μ₋, μ₊]`; weighted reports give an inner set (curve regions) and an
//! outer bracket (a disk) around the essential spectrum.

mod plasmonic;
mod sweep;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::Serialize;

pub use plasmonic::{plasmonic_map, PlasmonicDirection};
pub use sweep::{EigenBranch, FilteredPoint, Provenance, RawPoint, Sweep, SweepResult, Termination};

use crate::curves::{merge_intervals, sigma_max, RegionKind, RegionSet};
use crate::exec::ExecPolicy;
use crate::geometry::{PolyhedralCone, Polyhedron};
use crate::nystrom::{EigenFilter, MeshParams};
use crate::{Error, Result};

/// Tolerance for the congruence key and for flat-vertex detection.
pub const CONGRUENCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectraOptions {
    pub mesh: MeshParams,
    pub xi_max: f64,
    pub xi_steps: usize,
    /// Weights used to estimate `μ±` in energy mode.
    pub alpha_ladder: [f64; 2],
    /// Largest admitted `|dλ/dξ|` when stitching branches.
    pub slope_cap: f64,
    pub bisection_steps: usize,
    #[serde(skip)]
    pub exec: ExecPolicy,
}

impl Default for SpectraOptions {
    fn default() -> Self {
        SpectraOptions {
            mesh: MeshParams::default(),
            xi_max: 8.0,
            xi_steps: 33,
            alpha_ladder: [0.8, 0.9],
            slope_cap: 0.25,
            bisection_steps: 4,
            exec: ExecPolicy::default(),
        }
    }
}

impl SpectraOptions {
    pub fn validate(&self) -> Result<()> {
        self.mesh.validate()?;
        if !(self.xi_max.is_finite() && self.xi_max > 0.0) {
            return Err(Error::InvalidParams(format!("xi_max must be positive, got {}", self.xi_max)));
        }
        if self.xi_steps < 8 {
            return Err(Error::InvalidParams(format!(
                "xi_steps must be at least 8, got {}",
                self.xi_steps
            )));
        }
        for &a in &self.alpha_ladder {
            check_alpha(a)?;
        }
        if !(self.slope_cap > 0.0) {
            return Err(Error::InvalidParams("slope_cap must be positive".into()));
        }
        Ok(())
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("alpha must lie in [0, 1), got {alpha}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Space {
    Energy,
    Weighted { alpha: f64 },
}

/// Estimate of `μ₊` or `μ₋` (reported as a positive magnitude for `μ₋`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MuEstimate {
    pub value: f64,
    pub uncertainty: f64,
    /// Where the extreme branch value was attained.
    pub xi: f64,
    pub alpha: f64,
}

/// Interval of real numbers with explicit endpoint closedness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RealInterval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

/// Sweep diagnostics for one filter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub vertex_id: usize,
    pub alpha: f64,
    pub threshold: f64,
    pub cutoff: f64,
    pub xi_max: f64,
    pub xi_steps: usize,
    pub failed_xi: Vec<f64>,
    /// Largest real `|λ| < 1/2` on the refined mesh at `ξ_max`.
    pub tail_max: f64,
    pub tail_certified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub space: Space,
    /// Energy: `[−m, m]`. Weighted: the inner set (curve regions plus `Λ^α`).
    pub essential_core: RegionSet,
    /// Weighted only: disk bracket plus `Λ^α`.
    pub outer_bracket: Option<RegionSet>,
    /// `[−μ₋, −m)` and `(m, μ₊]` (energy only), halves omitted when empty.
    pub lambda_star_intervals: Vec<RealInterval>,
    pub mu_plus: Option<MuEstimate>,
    pub mu_minus: Option<MuEstimate>,
    pub branches: Vec<EigenBranch>,
    pub sweeps: Vec<SweepSummary>,
    pub per_vertex: BTreeMap<usize, SpectrumReport>,
    pub caveats: Vec<String>,
}

impl SpectrumReport {
    fn relabel(mut self, vertex: usize) -> Self {
        for b in &mut self.branches {
            b.vertex_id = vertex;
        }
        for s in &mut self.sweeps {
            s.vertex_id = vertex;
        }
        self
    }
}

/// `m = max_j |1 − β_j/π| / 2`.
pub fn energy_radius(angles: &[f64]) -> f64 {
    angles.iter().map(|&b| sigma_max(1.0, b)).fold(0.0, f64::max)
}

fn summarize(res: &SweepResult, filter: &EigenFilter, alpha: f64, opts: &SpectraOptions) -> SweepSummary {
    SweepSummary {
        vertex_id: 0,
        alpha,
        threshold: filter.threshold,
        cutoff: filter.cutoff(),
        xi_max: opts.xi_max,
        xi_steps: opts.xi_steps,
        failed_xi: res.failed.clone(),
        tail_max: res.tail_max,
        tail_certified: res.tail_certified,
    }
}

fn sweep_caveats(res: &SweepResult, alpha: f64, caveats: &mut Vec<String>) {
    if !res.failed.is_empty() {
        caveats.push(format!(
            "alpha={alpha}: eigenvalues did not stabilize under refinement at xi = {:?}; those points were skipped",
            res.failed
        ));
    }
    if !res.tail_certified {
        caveats.push(format!(
            "alpha={alpha}: an eigenvalue of modulus {} remains above the cutoff at xi_max; branches may continue beyond the sweep",
            res.tail_max
        ));
    }
}

/// A report needs at least one validated grid point, and the `ξ = 0` point
/// when the convexity shortcut is used.
fn require_points(res: &SweepResult, needs_zero: bool) -> Result<()> {
    if res.points.is_empty() {
        return Err(Error::NoConvergence("no sweep point passed the refinement check".into()));
    }
    if needs_zero && res.points[0].xi != 0.0 {
        return Err(Error::NoConvergence("the xi = 0 point failed the refinement check".into()));
    }
    Ok(())
}

/// Follows the isolated eigenvalues of `H(iξ)` on `L²_α` over
/// `ξ ∈ [0, ξ_max]`. Values for `−ξ` coincide since the kernels are even in `ξ`.
pub fn sweep_branches(cone: &PolyhedralCone, alpha: f64, opts: &SpectraOptions) -> Result<SweepResult> {
    check_alpha(alpha)?;
    let sweep = Sweep::run(cone, opts)?;
    Ok(sweep.stitch(&EigenFilter::weighted(cone.angles(), alpha), alpha))
}

/// Largest sample of `sign·λ` over the branches, with its uncertainty:
/// twice the refinement agreement plus half the largest neighbouring step.
fn extreme(branches: &[EigenBranch], sign: f64) -> Option<MuEstimate> {
    let (b, k) = branches
        .iter()
        .flat_map(|b| (0..b.samples.len()).map(move |k| (b, k)))
        .filter(|(b, k)| sign * b.samples[*k].1 > 0.0)
        .max_by(|x, y| (sign * x.0.samples[x.1].1).total_cmp(&(sign * y.0.samples[y.1].1)))?;
    let (xi, lambda) = b.samples[k];
    let neighbour = [k.checked_sub(1), Some(k + 1)]
        .into_iter()
        .flatten()
        .filter_map(|j| b.samples.get(j))
        .map(|s| (s.1 - lambda).abs())
        .fold(0.0, f64::max);
    Some(MuEstimate {
        value: sign * lambda,
        uncertainty: 2.0 * b.agreement[k] + 0.5 * neighbour,
        xi,
        alpha: b.alpha,
    })
}

/// Maximum of `sign·λ` at `ξ = 0` only.
fn extreme_at_zero(branches: &[EigenBranch], sign: f64) -> Option<MuEstimate> {
    let at_zero: Vec<EigenBranch> = branches
        .iter()
        .filter(|b| b.samples[0].0 == 0.0)
        .map(|b| EigenBranch {
            samples: b.samples[..1].to_vec(),
            agreement: b.agreement[..1].to_vec(),
            ..b.clone()
        })
        .collect();
    extreme(&at_zero, sign)
}

fn lambda_star(m: f64, mu_plus: Option<MuEstimate>, mu_minus: Option<MuEstimate>) -> Vec<RealInterval> {
    let mut out = Vec::new();
    if let Some(mu) = mu_minus {
        out.push(RealInterval {
            lo: -mu.value,
            hi: -m,
            lo_closed: true,
            hi_closed: false,
        });
    }
    if let Some(mu) = mu_plus {
        out.push(RealInterval {
            lo: m,
            hi: mu.value,
            lo_closed: false,
            hi_closed: true,
        });
    }
    out
}

/// Energy-space spectrum of the double layer operator on a Lipschitz cone.
pub fn cone_energy_spectrum(cone: &PolyhedralCone, opts: &SpectraOptions) -> Result<SpectrumReport> {
    opts.validate()?;
    if !cone.lipschitz {
        return Err(Error::NotLipschitz(
            "no axis makes the cone a radial graph; the energy space is undefined".into(),
        ));
    }
    let angles = cone.angles();
    let m = energy_radius(angles);
    let sweep = Sweep::run(cone, opts)?;
    let mut caveats = Vec::new();
    let mut branches = Vec::new();
    let mut sweeps = Vec::new();
    let mut estimates = Vec::new();
    for &alpha in &opts.alpha_ladder {
        let filter = EigenFilter::weighted(angles, alpha);
        let res = sweep.stitch(&filter, alpha);
        require_points(&res, cone.convex)?;
        sweep_caveats(&res, alpha, &mut caveats);
        sweeps.push(summarize(&res, &filter, alpha, opts));
        let plus = if cone.convex {
            extreme_at_zero(&res.branches, 1.0)
        } else {
            extreme(&res.branches, 1.0)
        };
        estimates.push((plus, extreme(&res.branches, -1.0)));
        branches.extend(res.branches);
    }
    // the largest weight of the ladder gives the final estimates
    let (mut mu_plus, mut mu_minus) = estimates[estimates.len() - 1];
    for (mu, k) in [(&mut mu_plus, 0), (&mut mu_minus, 1)] {
        if let Some(best) = mu.as_mut() {
            let spread = estimates
                .iter()
                .filter_map(|e| if k == 0 { e.0 } else { e.1 })
                .map(|e| (e.value - best.value).abs())
                .fold(0.0, f64::max);
            best.uncertainty = best.uncertainty.max(spread);
        }
    }
    if cone.convex {
        caveats.push("convex cone: mu_plus taken at xi = 0 (convexity shortcut)".into());
    }
    if mu_plus.is_none() {
        caveats.push(format!("mu_plus not detected: no positive eigenvalue above the cutoff; mu_plus <= {m} up to the margin"));
    }
    if mu_minus.is_none() {
        caveats.push(format!(
            "mu_minus not detected: no negative eigenvalue above the cutoff; mu_minus may equal the threshold {m}"
        ));
    }
    Ok(SpectrumReport {
        space: Space::Energy,
        essential_core: RegionSet::interval(-m, m),
        outer_bracket: None,
        lambda_star_intervals: lambda_star(m, mu_plus, mu_minus),
        mu_plus,
        mu_minus,
        branches,
        sweeps,
        per_vertex: BTreeMap::new(),
        caveats,
    })
}

fn lambda_alpha_intervals(branches: &[EigenBranch]) -> Vec<[f64; 2]> {
    merge_intervals(branches.iter().map(|b| b.range()).collect())
}

fn gap_caveat(radius: f64) -> String {
    format!(
        "points of the disk |lambda| <= {radius} outside the curve regions and the listed eigenvalue intervals are not characterized"
    )
}

/// Spectrum on `L²_α` of an arbitrary polyhedral cone.
pub fn cone_weighted_spectrum(cone: &PolyhedralCone, alpha: f64, opts: &SpectraOptions) -> Result<SpectrumReport> {
    check_alpha(alpha)?;
    opts.validate()?;
    let filter = EigenFilter::weighted(cone.angles(), alpha);
    let res = Sweep::run(cone, opts)?.stitch(&filter, alpha);
    require_points(&res, false)?;
    let mut caveats = Vec::new();
    sweep_caveats(&res, alpha, &mut caveats);
    let lambda_alpha = lambda_alpha_intervals(&res.branches);
    let mut inner = RegionSet::curve_union(cone.angles(), alpha);
    inner.intervals = lambda_alpha.clone();
    let outer = RegionSet {
        kind: RegionKind::DiskUnion,
        intervals: lambda_alpha,
        curves: Vec::new(),
        disk_radius: Some(filter.threshold),
    };
    caveats.push(gap_caveat(filter.threshold));
    Ok(SpectrumReport {
        space: Space::Weighted { alpha },
        essential_core: inner,
        outer_bracket: Some(outer),
        lambda_star_intervals: Vec::new(),
        mu_plus: extreme(&res.branches, 1.0),
        mu_minus: extreme(&res.branches, -1.0),
        sweeps: vec![summarize(&res, &filter, alpha, opts)],
        branches: res.branches,
        per_vertex: BTreeMap::new(),
        caveats,
    })
}

pub fn cone_spectrum(cone: &PolyhedralCone, space: Space, opts: &SpectraOptions) -> Result<SpectrumReport> {
    match space {
        Space::Energy => cone_energy_spectrum(cone, opts),
        Space::Weighted { alpha } => cone_weighted_spectrum(cone, alpha, opts),
    }
}

/// Sorted angles followed by sorted pairwise corner distances.
/// Sorted angles and sorted corner distances of a tangent cone.
type CongruenceKey = (Vec<f64>, Vec<f64>);

fn congruence_key(cone: &PolyhedralCone) -> CongruenceKey {
    let mut angles = cone.angles().to_vec();
    angles.sort_by(f64::total_cmp);
    let corners = &cone.cross_section.corners;
    let mut dists = Vec::new();
    for i in 0..corners.len() {
        for j in i + 1..corners.len() {
            // atan2 keeps full accuracy for nearly equal or antipodal corners
            dists.push(corners[i].cross(&corners[j]).norm().atan2(corners[i].dot(&corners[j])));
        }
    }
    dists.sort_by(f64::total_cmp);
    (angles, dists)
}

fn keys_match(a: &CongruenceKey, b: &CongruenceKey) -> bool {
    let close = |x: &[f64], y: &[f64]| x.len() == y.len() && x.iter().zip(y).all(|(p, q)| (p - q).abs() <= CONGRUENCE_TOL);
    close(&a.0, &b.0) && close(&a.1, &b.1)
}

/// Vertices whose tangent cone is a half-space.
fn is_flat(cone: &PolyhedralCone) -> bool {
    cone.angles().iter().all(|b| (b - PI).abs() <= CONGRUENCE_TOL)
}

/// Groups the non-flat vertices into congruence classes; returns
/// `(representative, members)` in vertex order.
pub fn congruence_classes(poly: &Polyhedron) -> Vec<(usize, Vec<usize>)> {
    let mut classes: Vec<(usize, CongruenceKey, Vec<usize>)> = Vec::new();
    for (v, cone) in poly.tangent_cones.iter().enumerate() {
        if is_flat(cone) {
            continue;
        }
        let key = congruence_key(cone);
        match classes.iter_mut().find(|c| keys_match(&c.1, &key)) {
            Some(c) => c.2.push(v),
            None => classes.push((v, key, vec![v])),
        }
    }
    classes.into_iter().map(|(r, _, m)| (r, m)).collect()
}

fn push_unique(caveats: &mut Vec<String>, c: String) {
    if !caveats.contains(&c) {
        caveats.push(c);
    }
}

/// Essential spectrum of the double layer operator on a bounded polyhedron:
/// the union of the tangent-cone spectra over all vertices.
pub fn polyhedron_essential_spectrum(poly: &Polyhedron, space: Space, opts: &SpectraOptions) -> Result<SpectrumReport> {
    opts.validate()?;
    if let Space::Energy = space {
        if let Some(v) = poly.tangent_cones.iter().position(|c| !c.lipschitz) {
            return Err(Error::NotLipschitz(format!(
                "the tangent cone at vertex {v} is not a radial graph; the energy space is undefined"
            )));
        }
    }
    if let Space::Weighted { alpha } = space {
        check_alpha(alpha)?;
    }
    let classes = congruence_classes(poly);
    let mut caveats = Vec::new();
    let flat: Vec<usize> = (0..poly.tangent_cones.len())
        .filter(|&v| is_flat(&poly.tangent_cones[v]))
        .collect();
    if !flat.is_empty() {
        caveats.push(format!("flat vertices {flat:?} contribute nothing and were skipped"));
    }
    let mut per_vertex = BTreeMap::new();
    let mut reps = Vec::new();
    for (rep, members) in &classes {
        let report = cone_spectrum(&poly.tangent_cones[*rep], space, opts)?.relabel(*rep);
        for &v in members {
            per_vertex.insert(v, report.clone().relabel(v));
        }
        reps.push(report);
    }

    let mut branches = Vec::new();
    let mut sweeps = Vec::new();
    for r in &reps {
        branches.extend(r.branches.iter().cloned());
        sweeps.extend(r.sweeps.iter().cloned());
        for c in &r.caveats {
            push_unique(&mut caveats, c.clone());
        }
    }
    let pick = |f: fn(&SpectrumReport) -> Option<MuEstimate>| {
        reps.iter()
            .filter_map(f)
            .max_by(|a, b| a.value.total_cmp(&b.value))
    };
    let mu_plus = pick(|r| r.mu_plus);
    let mu_minus = pick(|r| r.mu_minus);
    if mu_plus.is_some() {
        caveats.retain(|c| !c.starts_with("mu_plus not detected"));
    }
    if mu_minus.is_some() {
        caveats.retain(|c| !c.starts_with("mu_minus not detected"));
    }
    caveats.push(
        "isolated eigenvalues of the bounded polyhedron outside the essential spectrum are not computed".into(),
    );

    let (essential_core, outer_bracket, lambda_star_intervals) = match space {
        Space::Energy => {
            let m = reps
                .iter()
                .map(|r| r.essential_core.intervals[0][1])
                .fold(0.0, f64::max);
            (RegionSet::interval(-m, m), None, lambda_star(m, mu_plus, mu_minus))
        }
        Space::Weighted { alpha } => {
            let lambda_alpha = lambda_alpha_intervals(&branches);
            let mut inner = RegionSet::curve_union(&[], alpha);
            inner.curves = reps.iter().flat_map(|r| r.essential_core.curves.iter().copied()).collect();
            inner.intervals = lambda_alpha.clone();
            let radius = reps
                .iter()
                .filter_map(|r| r.outer_bracket.as_ref().and_then(|o| o.disk_radius))
                .fold(0.0, f64::max);
            let outer = RegionSet {
                kind: RegionKind::DiskUnion,
                intervals: lambda_alpha,
                curves: Vec::new(),
                disk_radius: Some(radius),
            };
            caveats.retain(|c| !c.starts_with("points of the disk"));
            caveats.push(gap_caveat(radius));
            (inner, Some(outer), Vec::new())
        }
    };
    Ok(SpectrumReport {
        space,
        essential_core,
        outer_bracket,
        lambda_star_intervals,
        mu_plus,
        mu_minus,
        branches,
        sweeps,
        per_vertex,
        caveats,
    })
}

#[cfg(test)]
mod tests;
