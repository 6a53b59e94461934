//! Closed-form essential spectrum curves of a corner and winding-number
//! membership tests.
//!
//! For a corner of angle `β` in the weighted space with exponent `α` the
//! curve is
//!
//! ```text
//! Σ_{α,β}(ξ) = ½ · sin((π − β) z) / sin(π z),   z = (1 − α)/2 + iξ,
//! ```
//!
//! a closed curve through the origin (the limit `|ξ| → ∞`) whose modulus
//! peaks at `ξ = 0`.

use std::f64::consts::PI;
use std::io::{self, Write};

use serde::Serialize;

use crate::{Error, Result, C64};

/// Number of samples on the default curve grid.
pub const CURVE_SAMPLES: usize = 2048;

/// Points closer than this to the sampled curve count as on the curve.
pub const ON_CURVE_TOL: f64 = 1e-9;

/// `ln sin z`, stable for large `|Im z|`. Any branch; only `exp` of
/// differences is used.
fn ln_sin(z: C64) -> C64 {
    let i = C64::i();
    if z.im >= 0.0 {
        -i * z + ((2.0 * i * z).exp() - 1.0).ln() - (2.0 * i).ln()
    } else {
        i * z + ((1.0 - (-2.0 * i * z).exp()) / (2.0 * i)).ln()
    }
}

/// Point `Σ_{α,β}(ξ)` of the spectral curve.
pub fn sigma_point(alpha: f64, beta: f64, xi: f64) -> C64 {
    let c = PI - beta;
    if c == 0.0 {
        return C64::new(0.0, 0.0);
    }
    let z = C64::new((1.0 - alpha) / 2.0, xi);
    let ratio = (ln_sin(c.abs() * z) - ln_sin(PI * z)).exp();
    0.5 * c.signum() * ratio
}

/// Maximum modulus `|Σ_{α,β}|`, attained at `ξ = 0`; `α = 1` gives the
/// limit `|1 − β/π| / 2`.
pub fn sigma_max(alpha: f64, beta: f64) -> f64 {
    if alpha >= 1.0 {
        return (1.0 - beta / PI).abs() / 2.0;
    }
    let h = (1.0 - alpha) / 2.0;
    0.5 * (((PI - beta) * h).sin() / (PI * h).sin()).abs()
}

/// Sampled curve `Σ_{α,β}` on a symmetric, tanh-spaced ξ-grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCurve {
    pub alpha: f64,
    pub beta: f64,
    pub samples: Vec<(f64, C64)>,
}

impl SpectralCurve {
    /// Default grid: [`CURVE_SAMPLES`] points on `[-Ξ, Ξ]` with
    /// `Ξ = 40 / min(β, 2π − β, π)`.
    pub fn new(alpha: f64, beta: f64) -> Self {
        let xi_cut = 40.0 / beta.min(2.0 * PI - beta).min(PI);
        Self::with_grid(alpha, beta, xi_cut, CURVE_SAMPLES)
    }

    pub fn with_grid(alpha: f64, beta: f64, xi_cut: f64, n: usize) -> Self {
        let t_max: f64 = 1.0 - 1e-6;
        let scale = xi_cut / t_max.atanh();
        let samples = (0..n)
            .map(|k| {
                let t = -t_max + 2.0 * t_max * k as f64 / (n - 1) as f64;
                let xi = scale * t.atanh();
                (xi, sigma_point(alpha, beta, xi))
            })
            .collect();
        SpectralCurve {
            alpha,
            beta,
            samples,
        }
    }

    pub fn max_modulus(&self) -> f64 {
        sigma_max(self.alpha, self.beta)
    }

    /// Closed polyline: the samples followed by the limit point 0, negated
    /// when `reflected`.
    pub fn polyline(&self, reflected: bool) -> Vec<C64> {
        let sign = if reflected { -1.0 } else { 1.0 };
        self.samples
            .iter()
            .map(|&(_, v)| sign * v)
            .chain(std::iter::once(C64::new(0.0, 0.0)))
            .collect()
    }

    pub fn summary(&self, reflected: bool) -> CurveSummary {
        CurveSummary {
            alpha: self.alpha,
            beta: self.beta,
            reflected,
            max_modulus: self.max_modulus(),
        }
    }

    /// CSV with columns `xi,re,im`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "xi,re,im")?;
        for (xi, v) in &self.samples {
            writeln!(out, "{:?},{:?},{:?}", xi, v.re, v.im)?;
        }
        Ok(())
    }
}

fn segment_distance(p: C64, a: C64, b: C64) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p - a) * d.conj()).re / len2).clamp(0.0, 1.0)
    };
    (p - (a + d * t)).norm()
}

fn polyline_winding(lambda: C64, points: &[C64]) -> Result<i32> {
    let n = points.len();
    let mut total = 0.0;
    for k in 0..n {
        let a = points[k];
        let b = points[(k + 1) % n];
        let distance = segment_distance(lambda, a, b);
        if distance < ON_CURVE_TOL {
            return Err(Error::OnCurve { distance });
        }
        total += ((b - lambda) / (a - lambda)).arg();
    }
    Ok((total / (2.0 * PI)).round() as i32)
}

/// Winding number of `lambda` with respect to `Σ` (or `−Σ` when
/// `reflected`).
pub fn winding_number(lambda: C64, curve: &SpectralCurve, reflected: bool) -> Result<i32> {
    polyline_winding(lambda, &curve.polyline(reflected))
}

/// Whether `lambda` lies on or inside some `±Σ_{α,β_j}`.
pub fn region_membership(lambda: C64, angles: &[f64], alpha: f64) -> bool {
    if lambda.norm() < ON_CURVE_TOL {
        return true;
    }
    angles.iter().any(|&beta| {
        if beta == PI {
            return false;
        }
        let curve = SpectralCurve::new(alpha, beta);
        [false, true]
            .iter()
            .any(|&r| !winding_number(lambda, &curve, r).is_ok_and(|w| w == 0))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionKind {
    Interval,
    CurveUnion,
    DiskUnion,
}

/// Compact description of a curve inside a report (samples are recomputed
/// from `alpha` and `beta` when needed).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveSummary {
    pub alpha: f64,
    pub beta: f64,
    pub reflected: bool,
    pub max_modulus: f64,
}

impl CurveSummary {
    pub fn curve(&self) -> SpectralCurve {
        SpectralCurve::new(self.alpha, self.beta)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionSet {
    pub kind: RegionKind,
    /// Disjoint, sorted closed intervals.
    pub intervals: Vec<[f64; 2]>,
    pub curves: Vec<CurveSummary>,
    pub disk_radius: Option<f64>,
}

impl RegionSet {
    pub fn interval(lo: f64, hi: f64) -> Self {
        RegionSet {
            kind: RegionKind::Interval,
            intervals: vec![[lo, hi]],
            curves: Vec::new(),
            disk_radius: None,
        }
    }

    /// `±Σ_{α,β}` for every corner, skipping straight angles (curve `{0}`).
    pub fn curve_union(angles: &[f64], alpha: f64) -> Self {
        let curves = angles
            .iter()
            .filter(|&&b| b != PI)
            .flat_map(|&beta| {
                let curve = SpectralCurve {
                    alpha,
                    beta,
                    samples: Vec::new(),
                };
                [curve.summary(false), curve.summary(true)]
            })
            .collect();
        RegionSet {
            kind: RegionKind::CurveUnion,
            intervals: Vec::new(),
            curves,
            disk_radius: None,
        }
    }

    pub fn contains_real(&self, x: f64) -> bool {
        self.intervals.iter().any(|&[lo, hi]| lo <= x && x <= hi)
    }
}

/// Sorts intervals and merges overlapping ones.
pub fn merge_intervals(mut intervals: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    intervals.sort_by(|a, b| a[0].total_cmp(&b[0]));
    let mut merged: Vec<[f64; 2]> = Vec::with_capacity(intervals.len());
    for iv in intervals {
        match merged.last_mut() {
            Some(last) if iv[0] <= last[1] => last[1] = last[1].max(iv[1]),
            _ => merged.push(iv),
        }
    }
    merged
}

/// Function space for the two-dimensional reference spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space2d {
    SobolevHalf,
    L2,
}

/// Essential spectrum of the double layer operator on a curvilinear polygon
/// with the given interior angles.
pub fn polygon_spectrum_2d(angles: &[f64], space: Space2d) -> RegionSet {
    match space {
        Space2d::SobolevHalf => {
            let m = angles.iter().map(|&b| sigma_max(1.0, b)).fold(0.0, f64::max);
            RegionSet::interval(-m, m)
        }
        Space2d::L2 => RegionSet::curve_union(angles, 0.0),
    }
}
