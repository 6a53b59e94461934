//! Nyström discretization of `H(iξ)` and `S̃(iξ)` on graded meshes of the
//! spherical polygon, with refinement-validated eigenvalue filtering.

mod eigen;
mod mesh;
mod system;

pub use eigen::{isolated_eigenvalues, match_candidates, EigenFilter, EigenResult, Matching};
pub use mesh::{build_mesh, Mesh, MeshNode, MeshParams};
pub use system::{assemble, assemble_with, calderon_residual, AssemblyMetadata, NystromSystem, REAL_TOL};
