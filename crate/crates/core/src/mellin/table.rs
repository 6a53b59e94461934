use std::f64::consts::PI;

use super::{mellin_quadrature, KernelValue, MellinKind, SINGULAR_GAP};
use crate::quadrature::Tolerance;
use crate::{ExecPolicy, Result, C64};

const PIECES: usize = 20;
const DEGREE: usize = 16;
const MAX_GAP: f64 = 2.0;

/// Piecewise Chebyshev interpolant in `x = ln δ` on `[ln SINGULAR_GAP, ln 2]`.
#[derive(Debug, Clone)]
struct ChebyshevPieces {
    x0: f64,
    width: f64,
    coeffs: Vec<[C64; DEGREE + 1]>,
}

impl ChebyshevPieces {
    fn nodes() -> [f64; DEGREE + 1] {
        let n = DEGREE + 1;
        std::array::from_fn(|j| (PI * (j as f64 + 0.5) / n as f64).cos())
    }

    fn sample_points(x0: f64, width: f64) -> Vec<f64> {
        let nodes = Self::nodes();
        (0..PIECES)
            .flat_map(|p| {
                let center = x0 + width * (p as f64 + 0.5);
                nodes.iter().map(move |t| center + 0.5 * width * t)
            })
            .collect()
    }

    fn from_values(x0: f64, width: f64, values: &[C64]) -> Self {
        let n = DEGREE + 1;
        let coeffs = values
            .chunks(n)
            .map(|f| {
                std::array::from_fn(|k| {
                    let sum: C64 = (0..n)
                        .map(|j| f[j] * (PI * k as f64 * (j as f64 + 0.5) / n as f64).cos())
                        .sum();
                    let scale = if k == 0 { 1.0 } else { 2.0 };
                    sum * (scale / n as f64)
                })
            })
            .collect();
        ChebyshevPieces { x0, width, coeffs }
    }

    fn eval(&self, x: f64) -> C64 {
        let rel = (x - self.x0) / self.width;
        let piece = (rel.floor().max(0.0) as usize).min(PIECES - 1);
        let t = (2.0 * (rel - piece as f64) - 1.0).clamp(-1.0, 1.0);
        let c = &self.coeffs[piece];
        // Clenshaw
        let (mut b1, mut b2) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        for &ck in c.iter().skip(1).rev() {
            let b0 = ck + b1 * (2.0 * t) - b2;
            b2 = b1;
            b1 = b0;
        }
        c[0] + b1 * t - b2
    }
}

/// Interpolation tables of the two Mellin integrals on the critical lines
/// `w = 3/2 + iξ` and `w = 1/2 + iξ` for one `ξ`, in the regularized forms
///
/// ```text
/// h₃(δ) = δ · M₃(3/2 + iξ, 1 − δ),   h₁(δ) = M₁(1/2 + iξ, 1 − δ) + ln(δ/2),
/// ```
///
/// both smooth in `ln δ`. Matrix assembly needs `O(N²)` kernel values per
/// `ξ`; the tables reduce that to a few hundred quadratures.
#[derive(Debug, Clone)]
pub struct MellinTable {
    pub xi: f64,
    h3: ChebyshevPieces,
    h1: ChebyshevPieces,
}

impl MellinTable {
    pub fn new(xi: f64, exec: ExecPolicy) -> Result<Self> {
        let x0 = SINGULAR_GAP.ln();
        let width = (MAX_GAP.ln() - x0) / PIECES as f64;
        let xs = ChebyshevPieces::sample_points(x0, width);
        let tol = Tolerance { abs: 1e-12, rel: 1e-12 };
        let samples = exec.map_indexed(2 * xs.len(), |i| -> Result<C64> {
            let delta = xs[i % xs.len()].exp();
            if i < xs.len() {
                let m = mellin_quadrature(MellinKind::ThreeHalf, C64::new(1.5, xi), delta, tol)?;
                Ok(m.value * delta)
            } else {
                let m = mellin_quadrature(MellinKind::OneHalf, C64::new(0.5, xi), delta, tol)?;
                Ok(m.value + (delta / 2.0).ln())
            }
        });
        let samples = samples.into_iter().collect::<Result<Vec<_>>>()?;
        let (s3, s1) = samples.split_at(xs.len());
        Ok(MellinTable {
            xi,
            h3: ChebyshevPieces::from_values(x0, width, s3),
            h1: ChebyshevPieces::from_values(x0, width, s1),
        })
    }

    /// `δ · M₃(3/2 + iξ, 1 − δ)`; tends to 1 as `δ → 0`.
    pub fn h3(&self, delta: f64) -> C64 {
        if delta < SINGULAR_GAP {
            return C64::new(1.0, 0.0);
        }
        self.h3.eval(delta.min(MAX_GAP).ln())
    }

    /// `M₁(1/2 + iξ, 1 − δ) + ln(δ/2)`, bounded as `δ → 0`.
    pub fn h1(&self, delta: f64) -> C64 {
        self.h1.eval(delta.clamp(SINGULAR_GAP, MAX_GAP).ln())
    }

    pub fn m3(&self, delta: f64) -> KernelValue {
        KernelValue {
            value: self.h3(delta) / delta,
            singular_flag: delta < SINGULAR_GAP,
        }
    }

    pub fn m1(&self, delta: f64) -> KernelValue {
        KernelValue {
            value: self.h1(delta) - (delta / 2.0).ln(),
            singular_flag: delta < SINGULAR_GAP,
        }
    }
}
