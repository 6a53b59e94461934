//! Command-line front end for `np-spectra`.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 geometry error,
//! 3 non-Lipschitz geometry in energy mode, 4 eigenvalues failed to
//! stabilize under refinement. Errors are also printed to stderr as JSON.

mod svg;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;
use serde::Serialize;

use np_spectra::curves::{sigma_max, SpectralCurve};
use np_spectra::geometry::{ConeSpec, PolyhedralCone, Polyhedron, PolyhedronSpec};
use np_spectra::mellin::{mellin_m1, mellin_m3};
use np_spectra::nystrom::{assemble, build_mesh, EigenFilter, MeshParams};
use np_spectra::spectra::{
    cone_spectrum, congruence_classes, polyhedron_essential_spectrum, EigenBranch, Space,
    SpectraOptions, SpectrumReport, Sweep, SweepSummary,
};
use np_spectra::ExecPolicy;

pub use svg::render_regions;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const THREADS_ENV: &str = "NP_SPECTRA_THREADS";

#[derive(Debug, Parser)]
#[command(name = "np-spectra", version, about = "Neumann-Poincare spectra of polyhedral cones and polyhedra")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample the essential spectrum curve of one corner angle.
    Curve {
        /// Corner angle in radians, in (0, 2π).
        #[arg(long)]
        beta: f64,
    },
    /// Spectrum report for a cone given by its edge directions.
    Cone { input: PathBuf },
    /// Essential spectrum of a bounded polyhedron (union over vertex cones).
    Polyhedron { input: PathBuf },
    /// Eigenvalue branches of a cone on the weighted space.
    Sweep { input: PathBuf },
    /// Evaluate a Mellin kernel integral M₃ or M₁ at (w, a).
    Kernel {
        #[arg(long, value_enum, default_value_t = KernelKind::M3)]
        kind: KernelKind,
        #[arg(long, allow_negative_numbers = true)]
        w_re: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        w_im: f64,
        #[arg(long, allow_negative_numbers = true)]
        a: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceArg {
    Energy,
    Weighted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    M3,
    M1,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Function space: the energy space or the weighted space L²_α.
    #[arg(long, value_enum, global = true, default_value_t = SpaceArg::Energy)]
    pub space: SpaceArg,
    /// Weight exponent α ∈ [0, 1).
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Upper end of the ξ sweep.
    #[arg(long, global = true, default_value_t = 8.0)]
    pub xi_max: f64,
    /// Grid points of the ξ sweep (at least 8).
    #[arg(long, global = true, default_value_t = 33)]
    pub xi_steps: usize,
    /// Panels per arc of the coarse mesh (the refined mesh has 1.5×).
    #[arg(long, global = true, default_value_t = 16)]
    pub panels: usize,
    /// Gauss–Legendre nodes per panel.
    #[arg(long, global = true, default_value_t = 10)]
    pub order: usize,
    /// Grading levels toward each corner.
    #[arg(long, global = true, default_value_t = 4)]
    pub grading: usize,
    /// Write curve samples or eigenvalue branches as CSV.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
    /// Write an SVG plot of the spectral regions.
    #[arg(long, global = true)]
    pub svg: Option<PathBuf>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    pub json: Option<PathBuf>,
    /// Write the ξ = 0 Nyström matrices of every computed cone to this directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub dump_matrices: Option<PathBuf>,
    /// Print the parsed geometry as JSON and exit without computing.
    #[arg(long, global = true)]
    pub echo_geometry: bool,
    /// Seed for randomized diagnostics; recorded in the report.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

/// Fully resolved configuration, echoed in every report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub subcommand: &'static str,
    pub input: Option<PathBuf>,
    pub space: SpaceArg,
    pub alpha: Option<f64>,
    pub alpha_ladder: [f64; 2],
    pub xi_max: f64,
    pub xi_steps: usize,
    pub mesh: MeshParams,
    pub refined_panels: usize,
    pub threads: Option<usize>,
    pub csv: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub json: Option<PathBuf>,
    pub dump_matrices: Option<PathBuf>,
    pub echo_geometry: bool,
    pub seed: u64,
    pub beta: Option<f64>,
    pub kernel: Option<KernelKind>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] np_spectra::Error),
    #[error("cannot parse geometry file {path}: {message}")]
    GeometryParse { path: PathBuf, message: String },
    #[error("{0}")]
    Usage(String),
    #[error("{context}: {source}")]
    Io { context: String, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use np_spectra::Error as E;
        match self {
            CliError::Core(E::DegenerateGeometry(_) | E::SelfIntersecting(_) | E::InvalidMesh(_)) => 2,
            CliError::Core(E::NotLipschitz(_)) => 3,
            CliError::Core(E::NoConvergence(_)) => 4,
            CliError::GeometryParse { .. } => 2,
            CliError::Core(_) | CliError::Usage(_) | CliError::Io { .. } => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        use np_spectra::Error as E;
        match self {
            CliError::Core(e) => match e {
                E::DegenerateGeometry(_) => "degenerate_geometry",
                E::SelfIntersecting(_) => "self_intersecting",
                E::InvalidMesh(_) => "invalid_mesh",
                E::OutOfRange { .. } => "out_of_range",
                E::StripViolation { .. } => "strip_violation",
                E::SingularPoint { .. } => "singular_point",
                E::OnCurve { .. } => "on_curve",
                E::InvalidParams(_) => "invalid_params",
                E::NoConvergence(_) => "no_convergence",
                E::NotLipschitz(_) => "not_lipschitz",
                E::PoleInput(_) => "pole_input",
                E::LinearAlgebra(_) => "linear_algebra",
            },
            CliError::GeometryParse { .. } => "geometry_parse",
            CliError::Usage(_) => "usage",
            CliError::Io { .. } => "io",
        }
    }

    /// Machine-readable form written to stderr.
    pub fn to_json(&self) -> String {
        serde_json::json!({
            "error": {
                "kind": self.kind(),
                "message": self.to_string(),
                "exit_code": self.exit_code(),
            },
            "version": VERSION,
        })
        .to_string()
    }
}

fn io_err(context: impl Into<String>) -> impl FnOnce(io::Error) -> CliError {
    let context = context.into();
    move |source| CliError::Io { context, source }
}

/// Worker count requested through `NP_SPECTRA_THREADS`.
pub fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
    }
}

impl RunConfig {
    pub fn resolve(cli: &Cli, threads: Option<usize>) -> Result<Self, CliError> {
        let c = &cli.common;
        let (subcommand, input, beta, kernel) = match &cli.command {
            Command::Curve { beta } => ("curve", None, Some(*beta), None),
            Command::Cone { input } => ("cone", Some(input.clone()), None, None),
            Command::Polyhedron { input } => ("polyhedron", Some(input.clone()), None, None),
            Command::Sweep { input } => ("sweep", Some(input.clone()), None, None),
            Command::Kernel { kind, .. } => ("kernel", None, None, Some(*kind)),
        };
        let alpha = match (subcommand, c.space, c.alpha) {
            ("curve", _, a) => Some(a.unwrap_or(0.0)),
            ("sweep", _, a) => Some(a.unwrap_or(0.9)),
            (_, SpaceArg::Weighted, None) if subcommand != "kernel" => {
                return Err(CliError::Usage("--space weighted requires --alpha".into()))
            }
            (_, _, a) => a,
        };
        if let Some(a) = alpha {
            let upper_ok = if subcommand == "curve" { a <= 1.0 } else { a < 1.0 };
            if !(a >= 0.0 && upper_ok) {
                return Err(CliError::Usage(format!("--alpha must lie in [0, 1), got {a}")));
            }
        }
        let mesh = MeshParams {
            panels_per_arc: c.panels,
            gauss_order: c.order,
            grading_levels: c.grading,
        };
        Ok(RunConfig {
            subcommand,
            input,
            space: c.space,
            alpha,
            alpha_ladder: SpectraOptions::default().alpha_ladder,
            xi_max: c.xi_max,
            xi_steps: c.xi_steps,
            mesh,
            refined_panels: mesh.refined().panels_per_arc,
            threads,
            csv: c.csv.clone(),
            svg: c.svg.clone(),
            json: c.json.clone(),
            dump_matrices: c.dump_matrices.clone(),
            echo_geometry: c.echo_geometry,
            seed: c.seed,
            beta,
            kernel,
        })
    }

    pub fn options(&self) -> SpectraOptions {
        SpectraOptions {
            mesh: self.mesh,
            xi_max: self.xi_max,
            xi_steps: self.xi_steps,
            exec: if self.threads == Some(1) {
                ExecPolicy::Sequential
            } else {
                ExecPolicy::Parallel
            },
            ..SpectraOptions::default()
        }
    }

    fn spectral_space(&self) -> Space {
        match self.space {
            SpaceArg::Energy => Space::Energy,
            SpaceArg::Weighted => Space::Weighted {
                alpha: self.alpha.expect("resolved"),
            },
        }
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    config: &'a RunConfig,
    #[serde(flatten)]
    body: T,
}

#[derive(Serialize)]
struct CurveBody {
    curve: CurveInfo,
}

#[derive(Serialize)]
struct CurveInfo {
    alpha: f64,
    beta: f64,
    sigma_max: f64,
    sampled_max_modulus: f64,
    samples: usize,
}

#[derive(Serialize)]
struct KernelBody {
    kernel: KernelInfo,
}

#[derive(Serialize)]
struct KernelInfo {
    kind: KernelKind,
    w: C64,
    a: f64,
    value: C64,
    error: f64,
    singular_flag: bool,
}

#[derive(Serialize)]
struct SweepBody {
    alpha: f64,
    threshold: f64,
    cutoff: f64,
    branches: Vec<EigenBranch>,
    sweep: SweepSummary,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(io_err(format!("cannot read {}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::GeometryParse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(io_err(format!("cannot write {}", path.display())))
}

fn emit_json<T: Serialize>(config: &RunConfig, body: T, stdout: &mut dyn Write) -> Result<(), CliError> {
    let envelope = Envelope {
        tool: "np-spectra",
        version: VERSION,
        config,
        body,
    };
    let text = serde_json::to_string_pretty(&envelope).expect("reports serialize") + "\n";
    match &config.json {
        Some(path) => write_text(path, &text),
        None => stdout.write_all(text.as_bytes()).map_err(io_err("cannot write stdout")),
    }
}

/// `vertex_id,alpha,xi,lambda`, one line per sample.
pub fn branch_csv(branches: &[EigenBranch]) -> String {
    let mut out = String::from("vertex_id,alpha,xi,lambda\n");
    for b in branches {
        for &(xi, lambda) in &b.samples {
            out.push_str(&format!("{},{:?},{:?},{:?}\n", b.vertex_id, b.alpha, xi, lambda));
        }
    }
    out
}

/// Distinct `(α, β)` curves of a report, in report order.
pub fn report_curves(report: &SpectrumReport) -> Vec<SpectralCurve> {
    report
        .essential_core
        .curves
        .iter()
        .filter(|c| !c.reflected)
        .map(|c| c.curve())
        .collect()
}

fn dump_cone(dir: &Path, prefix: &str, cone: &PolyhedralCone, config: &RunConfig) -> Result<(), CliError> {
    let alpha = config.alpha.unwrap_or(config.alpha_ladder[1]);
    for params in [config.mesh, config.mesh.refined()] {
        let mesh = build_mesh(
            &cone.cross_section,
            params.panels_per_arc,
            params.gauss_order,
            params.grading_levels,
        )?;
        let system = assemble(&cone.cross_section, &mesh, 0.0, alpha)?;
        let stem = format!("{prefix}xi0_P{}", params.panels_per_arc);
        system
            .dump(dir, &stem)
            .map_err(io_err(format!("cannot dump matrices to {}", dir.display())))?;
    }
    Ok(())
}

fn write_report_artifacts(config: &RunConfig, report: &SpectrumReport) -> Result<(), CliError> {
    if let Some(path) = &config.csv {
        write_text(path, &branch_csv(&report.branches))?;
    }
    if let Some(path) = &config.svg {
        write_text(path, &render_regions(report, &report_curves(report)))?;
    }
    Ok(())
}

fn echo<T: Serialize>(spec: &T, stdout: &mut dyn Write) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(spec).expect("geometry serializes") + "\n";
    stdout.write_all(text.as_bytes()).map_err(io_err("cannot write stdout"))
}

/// Executes one resolved command, writing the report to `stdout` unless
/// `--json` names a file.
pub fn execute(cli: &Cli, config: &RunConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    let opts = config.options();
    match &cli.command {
        Command::Curve { beta } => {
            let alpha = config.alpha.expect("resolved");
            if !(*beta > 0.0 && *beta < std::f64::consts::TAU) {
                return Err(CliError::Usage(format!("--beta must lie in (0, 2π), got {beta}")));
            }
            let curve = SpectralCurve::new(alpha, *beta);
            if let Some(path) = &config.csv {
                let mut buf = Vec::new();
                curve.write_csv(&mut buf).expect("writing to memory");
                write_text(path, std::str::from_utf8(&buf).expect("ascii"))?;
            }
            if let Some(path) = &config.svg {
                let report = curve_report(alpha, *beta);
                write_text(path, &render_regions(&report, std::slice::from_ref(&curve)))?;
            }
            let body = CurveBody {
                curve: CurveInfo {
                    alpha,
                    beta: *beta,
                    sigma_max: sigma_max(alpha, *beta),
                    sampled_max_modulus: curve.samples.iter().map(|s| s.1.norm()).fold(0.0, f64::max),
                    samples: curve.samples.len(),
                },
            };
            emit_json(config, body, stdout)
        }
        Command::Kernel { kind, w_re, w_im, a } => {
            let w = C64::new(*w_re, *w_im);
            let v = match kind {
                KernelKind::M3 => mellin_m3(w, *a)?,
                KernelKind::M1 => mellin_m1(w, *a)?,
            };
            let body = KernelBody {
                kernel: KernelInfo {
                    kind: *kind,
                    w,
                    a: *a,
                    value: v.value,
                    error: v.error,
                    singular_flag: v.singular_flag,
                },
            };
            emit_json(config, body, stdout)
        }
        Command::Cone { input } | Command::Sweep { input } => {
            let spec: ConeSpec = read_json(input)?;
            if config.echo_geometry {
                return echo(&spec, stdout);
            }
            let cone = spec.build()?;
            if let Some(dir) = &config.dump_matrices {
                dump_cone(dir, "", &cone, config)?;
            }
            if let Command::Sweep { .. } = cli.command {
                let alpha = config.alpha.expect("resolved");
                let filter = EigenFilter::weighted(cone.angles(), alpha);
                let res = Sweep::run(&cone, &opts)?.stitch(&filter, alpha);
                if res.points.is_empty() {
                    return Err(np_spectra::Error::NoConvergence("no sweep point passed the refinement check".into()).into());
                }
                if let Some(path) = &config.csv {
                    write_text(path, &branch_csv(&res.branches))?;
                }
                let body = SweepBody {
                    alpha,
                    threshold: filter.threshold,
                    cutoff: filter.cutoff(),
                    sweep: SweepSummary {
                        vertex_id: 0,
                        alpha,
                        threshold: filter.threshold,
                        cutoff: filter.cutoff(),
                        xi_max: opts.xi_max,
                        xi_steps: opts.xi_steps,
                        failed_xi: res.failed.clone(),
                        tail_max: res.tail_max,
                        tail_certified: res.tail_certified,
                    },
                    branches: res.branches,
                };
                return emit_json(config, body, stdout);
            }
            let report = cone_spectrum(&cone, config.spectral_space(), &opts)?;
            write_report_artifacts(config, &report)?;
            emit_json(config, &report, stdout)
        }
        Command::Polyhedron { input } => {
            let spec: PolyhedronSpec = read_json(input)?;
            if config.echo_geometry {
                return echo(&spec, stdout);
            }
            let poly = Polyhedron::new(&spec)?;
            if let Some(dir) = &config.dump_matrices {
                for (rep, _) in congruence_classes(&poly) {
                    dump_cone(dir, &format!("v{rep}_"), &poly.tangent_cones[rep], config)?;
                }
            }
            let report = polyhedron_essential_spectrum(&poly, config.spectral_space(), &opts)?;
            write_report_artifacts(config, &report)?;
            emit_json(config, &report, stdout)
        }
    }
}

/// Minimal weighted report holding one curve pair, for `curve --svg`.
fn curve_report(alpha: f64, beta: f64) -> SpectrumReport {
    let mut core = np_spectra::curves::RegionSet::curve_union(&[beta], alpha);
    core.intervals.clear();
    SpectrumReport {
        space: Space::Weighted { alpha: alpha.min(1.0) },
        essential_core: core,
        outer_bracket: None,
        lambda_star_intervals: Vec::new(),
        mu_plus: None,
        mu_minus: None,
        branches: Vec::new(),
        sweeps: Vec::new(),
        per_vertex: Default::default(),
        caveats: Vec::new(),
    }
}

fn init_threads(threads: Option<usize>) {
    if let Some(n) = threads {
        // a second initialization (tests calling run twice) keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

/// Parses `args`, runs, and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = stdout.write_all(text.as_bytes());
            } else {
                let err = CliError::Usage(text.trim_end().to_string());
                let _ = writeln!(stderr, "{}", err.to_json());
            }
            return code;
        }
    };
    let result = threads_from_env().and_then(|threads| {
        init_threads(threads);
        let config = RunConfig::resolve(&cli, threads)?;
        execute(&cli, &config, stdout)
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "{}", e.to_json());
            e.exit_code()
        }
    }
}
