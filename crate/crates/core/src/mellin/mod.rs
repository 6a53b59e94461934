//! Mellin power integrals and the kernels of `H(iξ)`, `H*(iξ)` and `S̃(iξ)`.
//!
//! ```text
//! M₃(w, a) = ∫₀^∞ t^w (t² − 2at + 1)^{−3/2} dt/t,   0 < Re w < 3,
//! M₁(w, a) = ∫₀^∞ t^w (t² − 2at + 1)^{−1/2} dt/t,   0 < Re w < 1.
//! ```
//!
//! With `t = e^u` and `δ = 1 − a` the integrands become
//! `e^{(w−p)u} (4 sinh²(u/2) + 2δ)^{−p}`, peaked on the scale `√(2δ)` around
//! `u = 0` and exponentially decaying at both ends. The gap `δ` is passed
//! directly where possible (`δ = |ω − ω'|²/2` for unit vectors), which keeps
//! full relative accuracy as the points approach each other.

mod table;

use std::f64::consts::PI;

use crate::geometry::ArcPoint;
use crate::quadrature::{integrate_panels, Tolerance};
use crate::{Error, Result, C64};

pub use table::MellinTable;

/// Below this gap `M₃` is replaced by its leading term `1/δ`.
pub const SINGULAR_GAP: f64 = 1e-8;

/// Dot products `|ω · n_{ω'}|` below this count as "same face" and give an
/// exactly zero double layer kernel.
pub const SAME_FACE_TOL: f64 = 1e-12;

const MAX_PANELS: usize = 4000;
const TAIL_EPS_LN: f64 = 36.84; // -ln(1e-16)

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MellinKind {
    /// Exponent −3/2, strip `0 < Re w < 3`.
    ThreeHalf,
    /// Exponent −1/2, strip `0 < Re w < 1`.
    OneHalf,
}

impl MellinKind {
    fn power(self) -> f64 {
        match self {
            MellinKind::ThreeHalf => 1.5,
            MellinKind::OneHalf => 0.5,
        }
    }

    /// Upper end of the strip of convergence.
    pub fn strip(self) -> f64 {
        2.0 * self.power()
    }
}

/// A Mellin integral evaluation request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MellinIntegralQuery {
    pub w: C64,
    pub a: f64,
    pub kind: MellinKind,
}

impl MellinIntegralQuery {
    pub fn evaluate(&self) -> Result<MellinValue> {
        mellin_integral(self.kind, self.w, 1.0 - self.a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MellinValue {
    pub value: C64,
    /// Quadrature error estimate (0 for the asymptotic branch).
    pub error: f64,
    /// Set when the gap is below [`SINGULAR_GAP`].
    pub singular_flag: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub value: C64,
    pub singular_flag: bool,
}

impl KernelValue {
    pub const ZERO: KernelValue = KernelValue {
        value: C64::new(0.0, 0.0),
        singular_flag: false,
    };
}

/// `ln(4 sinh²(u/2) + 2δ)` at `u = t + iθ`, without overflow for large `|t|`.
///
/// For `|θ| < arccos(1 − δ)` the argument stays off the negative real axis,
/// so the principal logarithm is the analytic continuation from `θ = 0`.
fn ln_gap(t: f64, theta: f64, delta: f64) -> C64 {
    let u = C64::new(t, theta);
    if t.abs() < 1.0 {
        let s = (0.5 * u).sinh();
        (4.0 * s * s + 2.0 * delta).ln()
    } else {
        let u = if t < 0.0 { -u } else { u };
        let e = (-u).exp();
        u + ((1.0 - e) * (1.0 - e) + 2.0 * delta * e).ln()
    }
}

/// Height of the integration line. The integrand is analytic for
/// `|Im u| < φ = arccos(1 − δ)`; shifting toward `φ` on the side that damps
/// `e^{i Im(w) u}` removes the cancellation that makes `|M|` exponentially
/// small in `|Im w|`.
fn contour_shift(im_w: f64, delta: f64) -> f64 {
    if im_w == 0.0 {
        return 0.0;
    }
    let phi = (1.0 - delta).clamp(-1.0, 1.0).acos();
    im_w.signum() * (phi - (0.5 * phi).min(1.0 / im_w.abs()))
}

fn tail_length(rate: f64) -> f64 {
    (TAIL_EPS_LN + (1.0 / rate).ln().max(0.0)) / rate
}

/// Panel breakpoints on `[0, end]`: geometric from the peak scale `c` up to
/// 1, then doubling up to `end`.
fn half_line_breaks(c: f64, end: f64) -> Vec<f64> {
    let mut breaks = vec![0.0];
    let mut x = c;
    while x < 1.0 && x < end {
        breaks.push(x);
        x *= 4.0;
    }
    x = 1.0;
    while x < end {
        breaks.push(x);
        x *= 2.0;
    }
    breaks.push(end);
    breaks
}

fn subdivide(breaks: Vec<f64>, max_width: f64) -> Vec<f64> {
    let mut out = vec![breaks[0]];
    for pair in breaks.windows(2) {
        let pieces = ((pair[1] - pair[0]) / max_width).ceil().max(1.0) as usize;
        for k in 1..=pieces {
            out.push(pair[0] + (pair[1] - pair[0]) * k as f64 / pieces as f64);
        }
    }
    out
}

fn check_args(kind: MellinKind, w: C64, delta: f64) -> Result<()> {
    if !(w.re > 0.0 && w.re < kind.strip()) || !w.im.is_finite() {
        return Err(Error::StripViolation {
            re: w.re,
            upper: kind.strip(),
        });
    }
    if !(delta > 0.0) {
        return Err(Error::SingularPoint { gap: delta });
    }
    Ok(())
}

/// Quadrature value of the Mellin integral at gap `δ = 1 − a` (no
/// asymptotic shortcut).
pub fn mellin_quadrature(kind: MellinKind, w: C64, delta: f64, tol: Tolerance) -> Result<MellinValue> {
    check_args(kind, w, delta)?;
    let delta = delta.min(2.0);
    let p = kind.power();
    let shift = w - p;
    let theta = contour_shift(w.im, delta);
    // the factor e^{−θ Im w} is taken out of the integrand and restored below
    let integrand = |t: f64| (shift * C64::new(t, theta) + theta * w.im - p * ln_gap(t, theta, delta)).exp();
    let c = (2.0 * (theta.cos() - 1.0 + delta)).sqrt();
    let mut right = half_line_breaks(c, tail_length(2.0 * p - w.re));
    let mut left = half_line_breaks(c, tail_length(w.re));
    if w.im.abs() > 50.0 {
        let width = PI / w.im.abs();
        right = subdivide(right, width);
        left = subdivide(left, width);
    }
    let breaks: Vec<f64> = left
        .iter()
        .rev()
        .map(|x| -x)
        .chain(right.into_iter().skip(1))
        .collect();
    let est = integrate_panels(integrand, &breaks, tol, MAX_PANELS);
    if !est.converged || !est.value.is_finite() {
        return Err(Error::NoConvergence(format!(
            "Mellin quadrature w={w}, gap={delta:e}: error {:e} after {} evaluations",
            est.error, est.evaluations
        )));
    }
    let scale = (-theta * w.im).exp();
    Ok(MellinValue {
        value: est.value * scale,
        error: est.error * scale,
        singular_flag: delta < SINGULAR_GAP,
    })
}

/// Mellin integral of either kind at gap `δ = 1 − a`, with the `M₃`
/// asymptotic `1/δ` below [`SINGULAR_GAP`].
pub fn mellin_integral(kind: MellinKind, w: C64, delta: f64) -> Result<MellinValue> {
    check_args(kind, w, delta)?;
    if kind == MellinKind::ThreeHalf && delta < SINGULAR_GAP {
        return Ok(MellinValue {
            value: C64::new(1.0 / delta, 0.0),
            error: 0.0,
            singular_flag: true,
        });
    }
    mellin_quadrature(kind, w, delta, Tolerance::default())
}

/// `M₃(w, a)`.
pub fn mellin_m3(w: C64, a: f64) -> Result<MellinValue> {
    mellin_integral(MellinKind::ThreeHalf, w, 1.0 - a)
}

/// `M₁(w, a)`.
pub fn mellin_m1(w: C64, a: f64) -> Result<MellinValue> {
    mellin_integral(MellinKind::OneHalf, w, 1.0 - a)
}

/// Gap `1 − ω·ω' = |ω − ω'|²/2`, accurate for nearby points.
pub fn gap(omega: &ArcPoint, omega_p: &ArcPoint) -> f64 {
    0.5 * (omega.point - omega_p.point).norm_squared()
}

fn coincidence(omega: &ArcPoint, omega_p: &ArcPoint) -> Result<f64> {
    let d = gap(omega, omega_p);
    if d == 0.0 {
        return Err(Error::SingularPoint { gap: 0.0 });
    }
    Ok(d)
}

/// Kernel of `H(iξ)`: `−(1/4π) (ω · n_{ω'}) M₃(3/2 + iξ, ω·ω')`.
pub fn kernel_h(xi: f64, omega: &ArcPoint, omega_p: &ArcPoint) -> Result<KernelValue> {
    let dn = omega.point.dot(&omega_p.normal);
    if dn.abs() < SAME_FACE_TOL {
        return Ok(KernelValue::ZERO);
    }
    let d = coincidence(omega, omega_p)?;
    let m = mellin_integral(MellinKind::ThreeHalf, C64::new(1.5, xi), d)?;
    Ok(KernelValue {
        value: -dn / (4.0 * PI) * m.value,
        singular_flag: m.singular_flag,
    })
}

/// Kernel of `H*(iξ)`, the transpose of [`kernel_h`].
pub fn kernel_hstar(xi: f64, omega: &ArcPoint, omega_p: &ArcPoint) -> Result<KernelValue> {
    kernel_h(xi, omega_p, omega)
}

/// Kernel of `S̃(iξ)`: `(1/4π) M₁(1/2 + iξ, ω·ω')`.
pub fn kernel_s(xi: f64, omega: &ArcPoint, omega_p: &ArcPoint) -> Result<KernelValue> {
    let d = coincidence(omega, omega_p)?;
    let m = mellin_integral(MellinKind::OneHalf, C64::new(0.5, xi), d)?;
    Ok(KernelValue {
        value: m.value / (4.0 * PI),
        singular_flag: m.singular_flag,
    })
}
