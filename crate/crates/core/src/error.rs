use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    #[error("cross-section polygon is not simple: {0}")]
    SelfIntersecting(String),
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("arc length {s} outside [0, {len}] on arc {arc}")]
    OutOfRange { arc: usize, s: f64, len: f64 },
    #[error("Mellin exponent {re} outside the admissible strip (0, {upper})")]
    StripViolation { re: f64, upper: f64 },
    #[error("kernel evaluated at a coincident point (1 - a = {gap:e})")]
    SingularPoint { gap: f64 },
    #[error("spectral parameter lies on the sampled curve (distance {distance:e})")]
    OnCurve { distance: f64 },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("eigenvalue filter did not stabilize under refinement: {0}")]
    NoConvergence(String),
    #[error("cone or polyhedron is not Lipschitz: {0}")]
    NotLipschitz(String),
    #[error("input {0} is a pole of the plasmonic map")]
    PoleInput(String),
    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),
}
