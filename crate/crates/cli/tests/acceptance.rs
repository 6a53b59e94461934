//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

mod common;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::panic::{self, AssertUnwindSafe};
use std::time::Instant;

use np_spectra::curves::{region_membership, sigma_max, SpectralCurve};
use np_spectra::geometry::{ConeSpec, PolyhedralCone, Polyhedron, PolyhedronSpec, Vec3};
use np_spectra::mellin::{mellin_m1, mellin_m3};
use np_spectra::nystrom::{assemble, build_mesh, calderon_residual, EigenFilter, MeshParams, NystromSystem};
use np_spectra::spectra::{
    cone_energy_spectrum, energy_radius, polyhedron_essential_spectrum, FilteredPoint, Space, SpectraOptions,
    SpectrumReport, Sweep,
};
use np_spectra::C64;
use rand::{rngs::StdRng, Rng, SeedableRng};

use common::{data, run_with_env};

/// Γ(3/4).
const GAMMA_3_4: f64 = 1.225_416_702_465_177_6;

type Outcome = (bool, String);

fn load_cone(name: &str) -> PolyhedralCone {
    let text = std::fs::read_to_string(data(name)).unwrap();
    serde_json::from_str::<ConeSpec>(&text).unwrap().build().unwrap()
}

fn load_poly(name: &str) -> Polyhedron {
    let text = std::fs::read_to_string(data(name)).unwrap();
    Polyhedron::new(&serde_json::from_str::<PolyhedronSpec>(&text).unwrap()).unwrap()
}

fn rel(a: C64, b: f64) -> f64 {
    (a - b).norm() / b.abs()
}

/// Interior dihedral angles from the edge directions alone.
fn dihedral_oracle(edges: &[Vec3]) -> Vec<f64> {
    let n = edges.len();
    (0..n)
        .map(|j| {
            let (prev, e, next) = (edges[(j + n - 1) % n], edges[j], edges[(j + 1) % n]);
            let u = (prev - e * e.dot(&prev)).normalize();
            let v = (next - e * e.dot(&next)).normalize();
            u.dot(&v).clamp(-1.0, 1.0).acos()
        })
        .collect()
}

struct Octant {
    cone: PolyhedralCone,
    sweep: Sweep,
}

fn octant_mu_cli() -> Outcome {
    let start = Instant::now();
    let path = data("octant.json");
    let out = run_with_env(
        &["cone", "--space", "energy", path.to_str().unwrap()],
        &[("NP_SPECTRA_THREADS", "4")],
    );
    let secs = start.elapsed().as_secs_f64();
    if out.code != 0 {
        return (false, format!("exit {}: {}", out.code, out.stderr.trim()));
    }
    let json = out.json();
    let mu = &json["mu_plus"];
    let value = mu["value"].as_f64().unwrap_or(f64::NAN);
    let ok = (value - 0.347).abs() <= 0.010 && mu["xi"] == 0.0 && secs < 180.0;
    (
        ok,
        format!(
            "mu_plus = {value:.6} ± {:.1e} (reference 0.34726), {secs:.1} s",
            mu["uncertainty"].as_f64().unwrap_or(f64::NAN)
        ),
    )
}

fn exact_cores() -> Outcome {
    let start = Instant::now();
    let octant = load_cone("octant.json");
    let pyramid = load_cone("pyramid.json");
    let oracle = dihedral_oracle(&pyramid.edges);
    let angles_ok = pyramid
        .angles()
        .iter()
        .zip(&oracle)
        .all(|(a, b)| (a - b).abs() < 1e-12 && (a - 2.0 * PI / 3.0).abs() < 1e-12);
    let oct = energy_radius(octant.angles());
    let pyr = energy_radius(pyramid.angles());
    let secs = start.elapsed().as_secs_f64();
    let ok = oct == 0.25 && (pyr - 1.0 / 6.0).abs() <= f64::EPSILON && angles_ok && secs < 1.0;
    (
        ok,
        format!("octant [-{oct}, {oct}], pyramid [-{pyr}, {pyr}] (1/6 off by {:.1e}), {secs:.3} s", (pyr - 1.0 / 6.0).abs()),
    )
}

fn mellin_oracles() -> Outcome {
    let w = C64::new(1.5, 0.0);
    let a = rel(mellin_m3(w, -1.0).unwrap().value, PI / 8.0);
    let b = rel(mellin_m3(w, 0.0).unwrap().value, GAMMA_3_4 * GAMMA_3_4 / PI.sqrt());
    let c = rel(mellin_m1(C64::new(0.5, 0.0), -1.0).unwrap().value, PI);
    let ok = a < 1e-8 && b < 1e-8 && c < 1e-8;
    (ok, format!("relative errors {a:.1e}, {b:.1e}, {c:.1e}"))
}

fn kernel_symmetry() -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(20);
    let (mut refl, mut imag) = (0.0_f64, 0.0_f64);
    for _ in 0..1000 {
        let a = rng.gen_range(-1.0..0.999);
        let xi = rng.gen_range(-8.0..8.0);
        let w3 = C64::new(rng.gen_range(0.05..2.95), xi);
        let m = mellin_m3(w3, a).unwrap().value;
        refl = refl.max((m - mellin_m3(3.0 - w3, a).unwrap().value).norm() / m.norm());
        imag = imag.max(mellin_m3(C64::new(1.5, xi), a).unwrap().value.im.abs());
        let w1 = C64::new(rng.gen_range(0.05..0.95), xi);
        let m = mellin_m1(w1, a).unwrap().value;
        refl = refl.max((m - mellin_m1(1.0 - w1, a).unwrap().value).norm() / m.norm());
        imag = imag.max(mellin_m1(C64::new(0.5, xi), a).unwrap().value.im.abs());
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = refl < 1e-9 && imag < 1e-10 && secs < 30.0;
    (ok, format!("max reflection defect {refl:.1e}, max |Im| on the line {imag:.1e}, {secs:.1} s"))
}

fn asymptotics() -> Outcome {
    let gap = 1e-4;
    let scaled = gap * mellin_m3(C64::new(1.5, 0.0), 1.0 - gap).unwrap().value.re;
    let shifted: Vec<f64> = (0..=16)
        .map(|k| {
            let gap = 10f64.powf(-6.0 + 4.0 * k as f64 / 16.0);
            mellin_m1(C64::new(0.5, 0.0), 1.0 - gap).unwrap().value.re + (gap / 2.0).ln()
        })
        .collect();
    let lo = shifted.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = shifted.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let ok = (0.95..=1.05).contains(&scaled) && hi - lo < 2.0;
    (ok, format!("(1-a) M3 = {scaled:.5}, log-corrected M1 spread {:.3}", hi - lo))
}

fn octant_systems(cone: &PolyhedralCone) -> Vec<(usize, f64, NystromSystem)> {
    let mut out = Vec::new();
    for p in [8, 16, 24] {
        let mesh = build_mesh(&cone.cross_section, p, 10, 4).unwrap();
        for xi in [0.0, 1.0, 5.0] {
            out.push((p, xi, assemble(&cone.cross_section, &mesh, xi, 0.0).unwrap()));
        }
    }
    out
}

fn calderon(systems: &[(usize, f64, NystromSystem)]) -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for xi in [0.0, 1.0, 5.0] {
        let r: Vec<f64> = systems
            .iter()
            .filter(|s| s.1 == xi)
            .map(|s| calderon_residual(&s.2))
            .collect();
        ok &= r[2] < 1e-3 && r.windows(2).all(|w| w[1] < w[0]);
        detail.push(format!("xi={xi}: {:.1e}/{:.1e}/{:.1e}", r[0], r[1], r[2]));
    }
    (ok, detail.join(", "))
}

fn gram(systems: &[(usize, f64, NystromSystem)]) -> Outcome {
    let failed: Vec<String> = systems
        .iter()
        .filter(|s| !s.2.gram_is_positive())
        .map(|s| format!("P={} xi={}", s.0, s.1))
        .collect();
    let min = systems
        .iter()
        .map(|s| s.2.gram_min_eigenvalue().unwrap())
        .fold(f64::INFINITY, f64::min);
    (
        failed.is_empty(),
        format!("{} of {} factorizations succeeded, smallest Gram eigenvalue {min:.2e}", systems.len() - failed.len(), systems.len()),
    )
}

fn filtered(oct: &Octant, alpha: f64) -> Vec<FilteredPoint> {
    let filter = EigenFilter::weighted(oct.cone.angles(), alpha);
    oct.sweep
        .raw()
        .iter()
        .map(|(_, raw)| oct.sweep.filter(raw.as_ref().unwrap(), &filter).unwrap())
        .collect()
}

fn hygiene(oct: &Octant) -> Outcome {
    let filter = EigenFilter::weighted(oct.cone.angles(), 0.9);
    let mut worst_im = 0.0_f64;
    let mut worst_re = 0.0_f64;
    let mut count = 0;
    for (_, raw) in oct.sweep.raw() {
        let raw = raw.as_ref().unwrap();
        // every eigenvalue that could pass the filter, on both meshes
        for z in raw.coarse.iter().chain(&raw.refined).filter(|z| z.norm() > filter.cutoff()) {
            worst_im = worst_im.max(z.im.abs());
            worst_re = worst_re.max(z.re.abs());
        }
        count += oct.sweep.filter(raw, &filter).unwrap().values.len();
    }
    let mut mirror = 0.0_f64;
    for xi in [1.0, 3.0] {
        let plus = oct.sweep.filter(&oct.sweep.raw_point(xi).unwrap(), &filter).unwrap();
        let minus = oct.sweep.filter(&oct.sweep.raw_point(-xi).unwrap(), &filter).unwrap();
        if plus.values.len() != minus.values.len() {
            mirror = f64::INFINITY;
        }
        for (a, b) in plus.values.iter().zip(&minus.values) {
            mirror = mirror.max((a - b).abs());
        }
    }
    let ok = count > 0 && worst_im < 1e-6 && worst_re < 0.5 && mirror < 1e-10;
    (
        ok,
        format!(
            "{count} filtered values; beyond the cutoff max |Im| {worst_im:.1e}, max |Re| {worst_re:.4}; xi/-xi defect {mirror:.1e}"
        ),
    )
}

fn alpha_monotone(oct: &Octant) -> Outcome {
    let low = filtered(oct, 0.8);
    let high = filtered(oct, 0.9);
    let mut worst = 0.0_f64;
    for (p, q) in low.iter().zip(&high) {
        for v in &p.values {
            let d = q.values.iter().map(|w| (v - w).abs()).fold(f64::INFINITY, f64::min);
            worst = worst.max(d);
        }
    }
    let mu = |p: &FilteredPoint| (p.values[0], 2.0 * p.agreement[0]);
    let (m8, u8) = mu(&low[0]);
    let (m9, u9) = mu(&high[0]);
    let ok = worst < 1e-3 && (m8 - m9).abs() <= u8 + u9;
    (
        ok,
        format!("containment defect {worst:.1e}; mu_plus {m8:.6} ± {u8:.1e} (0.8) vs {m9:.6} ± {u9:.1e} (0.9)"),
    )
}

fn convexity(oct: &Octant) -> Outcome {
    let filter = EigenFilter::weighted(oct.cone.angles(), 0.9);
    let res = oct.sweep.stitch(&filter, 0.9);
    let (mut best, mut at) = (f64::NEG_INFINITY, f64::NAN);
    for b in &res.branches {
        for &(xi, l) in &b.samples {
            if l.abs() > best {
                best = l.abs();
                at = xi;
            }
        }
    }
    let at_zero = res
        .branches
        .iter()
        .filter(|b| b.samples[0].0 == 0.0)
        .map(|b| b.samples[0].1.abs())
        .fold(f64::NEG_INFINITY, f64::max);
    let ok = best - at_zero <= filter.tau_match;
    (ok, format!("sweep max {best:.6} at xi = {at}, value at xi = 0 {at_zero:.6}"))
}

fn curve_suite() -> Outcome {
    let betas = [FRAC_PI_4, FRAC_PI_2, 2.0 * PI / 3.0, 3.0 * FRAC_PI_2];
    let alphas: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
    let mut monotone = true;
    let mut grid_err = 0.0_f64;
    let mut misses = 0;
    for &beta in &betas {
        let s: Vec<f64> = alphas.iter().map(|&a| sigma_max(a, beta)).collect();
        monotone &= s.windows(2).all(|w| w[1] < w[0]);
        for &alpha in &alphas[..10] {
            let xi_cut = 40.0 / beta.min(2.0 * PI - beta).min(PI);
            let dense = SpectralCurve::with_grid(alpha, beta, xi_cut, 100_000);
            let max = dense.samples.iter().map(|s| s.1.norm()).fold(0.0, f64::max);
            grid_err = grid_err.max((max - sigma_max(alpha, beta)).abs());
        }
        for alpha in [0.0, 0.5, 0.9] {
            let m = sigma_max(alpha, beta);
            misses += (0..100)
                .map(|k| m * (1.0 - 1e-3) * (-1.0 + 2.0 * k as f64 / 99.0))
                .filter(|&x| !region_membership(C64::new(x, 0.0), &[beta], alpha))
                .count();
        }
    }
    let ok = monotone && grid_err < 1e-6 && misses == 0;
    (
        ok,
        format!("sigma_max decreasing: {monotone}; dense-grid defect {grid_err:.1e}; {misses} real points outside the regions"),
    )
}

fn comparable(r: &SpectrumReport) -> serde_json::Value {
    let mut v = serde_json::to_value(r).unwrap();
    let obj = v.as_object_mut().unwrap();
    obj.remove("per_vertex");
    obj.remove("caveats");
    for key in ["branches", "sweeps"] {
        for item in obj[key].as_array_mut().unwrap() {
            item.as_object_mut().unwrap().remove("vertex_id");
        }
    }
    v
}

fn polyhedra() -> Outcome {
    let opts = SpectraOptions {
        mesh: MeshParams::default().with_panels(8),
        xi_steps: 9,
        ..SpectraOptions::default()
    };
    let cube = polyhedron_essential_spectrum(&load_poly("cube.json"), Space::Energy, &opts).unwrap();
    let octant = cone_energy_spectrum(&load_cone("octant.json"), &opts).unwrap();
    let same = comparable(&cube) == comparable(&octant);
    let brick = data("twobrick.json");
    let brick = brick.to_str().unwrap();
    let energy = run_with_env(&["polyhedron", "--space", "energy", brick], &[]).code;
    let weighted = run_with_env(
        &["polyhedron", "--space", "weighted", "--alpha", "0.5", "--panels", "8", "--xi-steps", "9", brick],
        &[],
    )
    .code;
    let ok = same && energy == 3 && weighted == 0;
    (
        ok,
        format!("cube report equals octant report: {same}; two-brick energy exit {energy}, weighted exit {weighted}"),
    )
}

fn main() {
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    let mut check = |id: usize, name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let outcome = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            (false, format!("panicked: {msg}"))
        });
        let tag = if outcome.0 { "PASS" } else { "FAIL" };
        println!("{tag} [{id:>2}] {name}: {}", outcome.1);
        results.push((id, name, outcome));
    };

    check(1, "octant mu_plus via CLI", &mut octant_mu_cli);
    check(2, "exact essential intervals", &mut exact_cores);
    check(3, "Mellin oracles", &mut mellin_oracles);
    check(4, "kernel symmetry suite", &mut kernel_symmetry);
    check(5, "Mellin asymptotics", &mut asymptotics);

    let cone = load_cone("octant.json");
    let systems = octant_systems(&cone);
    check(6, "Calderon residual", &mut || calderon(&systems));

    let oct = Octant {
        sweep: Sweep::run(&cone, &SpectraOptions::default()).unwrap(),
        cone,
    };
    check(7, "eigenvalue hygiene", &mut || hygiene(&oct));
    check(8, "alpha monotonicity", &mut || alpha_monotone(&oct));
    check(9, "convexity shortcut", &mut || convexity(&oct));
    check(10, "spectral curve suite", &mut curve_suite);
    check(11, "polyhedron assembly", &mut polyhedra);
    check(12, "Gram positivity", &mut || gram(&systems));

    let failed = results.iter().filter(|r| !r.2 .0).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
