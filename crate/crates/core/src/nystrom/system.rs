use std::f64::consts::PI;
use std::fs;
use std::io;
use std::path::Path;
use std::sync::Arc;

use faer::{Mat, Side};
use serde::Serialize;

use super::mesh::{build_mesh, Mesh, MeshParams};
use crate::geometry::SphericalPolygon;
use crate::mellin::{gap, MellinTable, SAME_FACE_TOL};
use crate::quadrature::{gauss_legendre, lagrange_basis, log_weighted_gauss};
use crate::{Error, ExecPolicy, Result, C64};

/// Nodes of the self-panel product rules (log-weighted and plain Gauss).
const SELF_PANEL_ORDER: usize = 24;

/// Entries of `A` with `|Im| ≤ REAL_TOL` are treated as real.
pub const REAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
pub struct AssemblyMetadata {
    pub nodes: usize,
    pub mesh: MeshParams,
    pub self_panel_order: usize,
    /// Kernel evaluations that fell in the asymptotic near-coincidence regime.
    pub singular_entries: usize,
}

/// Discretized `H(iξ)` (as `A`, similarity-transformed to the weighted
/// space) and `S̃(iξ)` (as the symmetric Gram matrix `B`).
///
/// With Nyström weights `w` and weight values `q`,
///
/// ```text
/// A[m,k] = q_m^{−α/2} √w_m H(ω_m, ω_k) √w_k q_k^{α/2}
/// B[m,k] = √w_m S(ω_m, ω_k) √w_k        (product integration on the diagonal panels)
/// ```
///
/// Both are diagonal similarities of the plain Nyström matrices, so the
/// eigenvalues are those of the standard rule `H(ω_m, ω_k) w_k`; the
/// symmetric scaling makes the Calderón identity read `A₀B = BA₀ᵀ`.
#[derive(Debug, Clone)]
pub struct NystromSystem {
    pub mesh: Mesh,
    pub xi: f64,
    pub alpha: f64,
    pub a: Mat<C64>,
    pub b: Mat<f64>,
    pub metadata: AssemblyMetadata,
    table: Arc<MellinTable>,
    exec: ExecPolicy,
}

/// Assembles the system for `polygon` with the mesh parameters of `mesh`.
pub fn assemble(polygon: &SphericalPolygon, mesh: &Mesh, xi: f64, alpha: f64) -> Result<NystromSystem> {
    debug_assert_eq!(polygon.corners, mesh.polygon.corners);
    let exec = ExecPolicy::default();
    let table = Arc::new(MellinTable::new(xi, exec)?);
    assemble_with(mesh, table, alpha, exec)
}

/// Assembly with a precomputed kernel table (shared across meshes at the
/// same `ξ`).
pub fn assemble_with(
    mesh: &Mesh,
    table: Arc<MellinTable>,
    alpha: f64,
    exec: ExecPolicy,
) -> Result<NystromSystem> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::InvalidParams(format!("alpha must lie in [0, 1), got {alpha}")));
    }
    let n = mesh.len();
    let nodes = &mesh.nodes;
    let sqrt_w: Vec<f64> = nodes.iter().map(|nd| nd.weight.sqrt()).collect();
    let qpow: Vec<f64> = nodes.iter().map(|nd| nd.at.q.powf(alpha / 2.0)).collect();
    let inv4pi = 1.0 / (4.0 * PI);

    let mut a = vec![C64::new(0.0, 0.0); n * n];
    exec.for_each_row(&mut a, n.max(1), |m, row| {
        let om = &nodes[m].at;
        for (k, entry) in row.iter_mut().enumerate() {
            let ok = &nodes[k].at;
            if om.arc == ok.arc {
                continue;
            }
            let dn = om.point.dot(&ok.normal);
            if dn.abs() < SAME_FACE_TOL {
                continue;
            }
            let h = -dn * inv4pi * table.m3(gap(om, ok)).value;
            *entry = h * (sqrt_w[m] * sqrt_w[k] * qpow[k] / qpow[m]);
        }
    });
    let singular_entries = count_singular(mesh);

    let log_rule = log_weighted_gauss(SELF_PANEL_ORDER);
    let gl_rule: Vec<(f64, f64)> = gauss_legendre(SELF_PANEL_ORDER)
        .into_iter()
        .map(|(x, w)| (0.5 * (x + 1.0), 0.5 * w))
        .collect();
    let mut b = vec![0.0; n * n];
    exec.for_each_row(&mut b, n.max(1), |m, row| {
        let om = &nodes[m];
        let own = mesh.panel_nodes(om.at.arc, om.panel);
        for (k, entry) in row.iter_mut().enumerate() {
            if own.contains(&k) {
                continue;
            }
            let s = inv4pi * table.m1(gap(&om.at, &nodes[k].at)).value.re;
            *entry = s * sqrt_w[m] * sqrt_w[k];
        }
        let local = self_panel_row(mesh, m, &table, &log_rule, &gl_rule);
        for (offset, k) in own.enumerate() {
            row[k] = local[offset] * sqrt_w[m] / sqrt_w[k];
        }
    });
    let b = Mat::from_fn(n, n, |i, j| 0.5 * (b[i * n + j] + b[j * n + i]));
    let a = Mat::from_fn(n, n, |i, j| a[i * n + j]);

    Ok(NystromSystem {
        mesh: mesh.clone(),
        xi: table.xi,
        alpha,
        a,
        b,
        metadata: AssemblyMetadata {
            nodes: n,
            mesh: mesh.params,
            self_panel_order: SELF_PANEL_ORDER,
            singular_entries,
        },
        table,
        exec,
    })
}

fn count_singular(mesh: &Mesh) -> usize {
    let nodes = &mesh.nodes;
    nodes
        .iter()
        .map(|m| {
            nodes
                .iter()
                .filter(|k| k.at.arc != m.at.arc && gap(&m.at, &k.at) < crate::mellin::SINGULAR_GAP)
                .count()
        })
        .sum()
}

/// Product-integration weights `R[k]` with `∫_panel S(s_m, s) φ(s) ds ≈
/// Σ_k R[k] φ(s_k)` for the panel containing node `m`.
///
/// On one arc `δ = 2 sin²(t/2)` with `t = |s − s_m|`, and
/// `4π S = −2 ln t + r(t)` with
/// `r(t) = h₁(δ) + 2 ln 2 − 2 ln(2 sin(t/2) / t)` smooth. Each side of
/// `s_m` is mapped to `[0, 1]`; the logarithm is integrated by the
/// `−ln x`-weighted Gauss rule and the rest by Gauss–Legendre, both against
/// the Lagrange basis of the panel nodes.
fn self_panel_row(
    mesh: &Mesh,
    m: usize,
    table: &MellinTable,
    log_rule: &[(f64, f64)],
    gl_rule: &[(f64, f64)],
) -> Vec<f64> {
    let node = &mesh.nodes[m];
    let range = mesh.panel_nodes(node.at.arc, node.panel);
    let panel_s: Vec<f64> = mesh.nodes[range].iter().map(|nd| nd.at.s).collect();
    let breaks = &mesh.panel_breaks[node.at.arc];
    let (lo, hi) = (breaks[node.panel], breaks[node.panel + 1]);
    let sm = node.at.s;
    let mut row = vec![0.0; panel_s.len()];
    for (d, sign) in [(sm - lo, -1.0), (hi - sm, 1.0)] {
        if d <= 0.0 {
            continue;
        }
        let scale = d / (4.0 * PI);
        for &(x, w) in log_rule {
            let basis = lagrange_basis(&panel_s, sm + sign * d * x);
            for (r, l) in row.iter_mut().zip(&basis) {
                *r += scale * 2.0 * w * l;
            }
        }
        for &(x, w) in gl_rule {
            let t = d * x;
            let half = 0.5 * t;
            let delta = 2.0 * half.sin().powi(2);
            let smooth = table.h1(delta).re + 2.0 * 2f64.ln() - 2.0 * (half.sin() / half).ln();
            let value = -2.0 * d.ln() + smooth;
            let basis = lagrange_basis(&panel_s, sm + sign * t);
            for (r, l) in row.iter_mut().zip(&basis) {
                *r += scale * w * value * l;
            }
        }
    }
    row
}

#[derive(Debug, Serialize)]
struct DumpSidecar<'a> {
    rows: usize,
    cols: usize,
    layout: &'static str,
    xi: f64,
    alpha: f64,
    mesh: MeshParams,
    files: [&'a str; 3],
}

impl NystromSystem {
    pub fn len(&self) -> usize {
        self.a.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.a.nrows() == 0
    }

    pub fn table(&self) -> &Arc<MellinTable> {
        &self.table
    }

    pub fn max_imag(&self) -> f64 {
        let n = self.len();
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| self.a[(i, j)].im.abs())
            .fold(0.0, f64::max)
    }

    /// Same `ξ`, `α` and order on a mesh with `panels` panels per arc.
    pub fn with_panels(&self, panels: usize) -> Result<NystromSystem> {
        let p = self.mesh.params.with_panels(panels);
        let mesh = build_mesh(&self.mesh.polygon, p.panels_per_arc, p.gauss_order, p.grading_levels)?;
        assemble_with(&mesh, self.table.clone(), self.alpha, self.exec)
    }

    /// Eigenvalues of `A`, sorted by descending real part then imaginary
    /// part. Real matrices (the case for real `ξ`) use the real solver.
    pub fn eigenvalues(&self) -> Result<Vec<C64>> {
        let n = self.len();
        let mut values = if self.max_imag() <= REAL_TOL {
            let real = Mat::from_fn(n, n, |i, j| self.a[(i, j)].re);
            real.eigenvalues()
        } else {
            self.a.eigenvalues()
        }
        .map_err(|e| Error::LinearAlgebra(format!("eigenvalue solver failed: {e:?}")))?;
        values.sort_by(|x, y| y.re.total_cmp(&x.re).then(y.im.total_cmp(&x.im)));
        Ok(values)
    }

    /// `A` with the weight similarity removed (the `α = 0` matrix).
    pub fn unweighted_a(&self) -> Mat<C64> {
        let q: Vec<f64> = self.mesh.nodes.iter().map(|nd| nd.at.q.powf(self.alpha / 2.0)).collect();
        Mat::from_fn(self.len(), self.len(), |i, j| self.a[(i, j)] * (q[i] / q[j]))
    }

    /// Whether the Cholesky factorization of `B` succeeds.
    pub fn gram_is_positive(&self) -> bool {
        self.b.llt(Side::Lower).is_ok()
    }

    /// Smallest eigenvalue of `B`.
    pub fn gram_min_eigenvalue(&self) -> Result<f64> {
        let values = self
            .b
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::LinearAlgebra(format!("{e:?}")))?;
        Ok(values.into_iter().fold(f64::INFINITY, f64::min))
    }

    /// Writes `A` (real and imaginary parts) and `B` as row-major
    /// little-endian doubles, with a JSON sidecar describing them.
    pub fn dump(&self, dir: &Path, stem: &str) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        let n = self.len();
        let names = [
            format!("{stem}_A_re.bin"),
            format!("{stem}_A_im.bin"),
            format!("{stem}_B.bin"),
        ];
        let write = |name: &str, f: &dyn Fn(usize, usize) -> f64| -> io::Result<()> {
            let mut bytes = Vec::with_capacity(8 * n * n);
            for i in 0..n {
                for j in 0..n {
                    bytes.extend_from_slice(&f(i, j).to_le_bytes());
                }
            }
            fs::write(dir.join(name), bytes)
        };
        write(&names[0], &|i, j| self.a[(i, j)].re)?;
        write(&names[1], &|i, j| self.a[(i, j)].im)?;
        write(&names[2], &|i, j| self.b[(i, j)])?;
        let sidecar = DumpSidecar {
            rows: n,
            cols: n,
            layout: "row-major little-endian f64",
            xi: self.xi,
            alpha: self.alpha,
            mesh: self.mesh.params,
            files: [&names[0], &names[1], &names[2]],
        };
        let json = serde_json::to_string_pretty(&sidecar).map_err(io::Error::other)?;
        fs::write(dir.join(format!("{stem}.json")), json + "\n")
    }
}

/// Discrete Calderón defect `‖A₀B − BA₀ᵀ‖_F / (‖A₀‖_F ‖B‖_F)` with `A₀` the
/// unweighted double layer matrix.
pub fn calderon_residual(system: &NystromSystem) -> f64 {
    let b = Mat::from_fn(system.len(), system.len(), |i, j| C64::new(system.b[(i, j)], 0.0));
    calderon_defect(&system.unweighted_a(), &b)
}

pub(crate) fn calderon_defect(a: &Mat<C64>, b: &Mat<C64>) -> f64 {
    let ab = a * b;
    let bat = b * a.transpose();
    let diff = &ab - &bat;
    diff.norm_l2() / (a.norm_l2() * b.norm_l2())
}
