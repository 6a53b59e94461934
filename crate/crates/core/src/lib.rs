//! Spectral analysis of the Neumann–Poincaré (double layer) operator on
//! polyhedral cones and bounded polyhedra.
//!
//! The operator on a cone is a Mellin convolution; after the Mellin transform
//! it becomes a family of double layer operators `H(iξ)` on the spherical
//! polygon cut out by the cone. This crate
//!
//! * builds cones and polyhedra and their spherical cross-sections ([`geometry`]),
//! * evaluates the closed-form essential spectrum curves ([`curves`]),
//! * evaluates the Mellin-transformed kernels by quadrature ([`mellin`]),
//! * discretizes `H(iξ)` and its single layer companion by a graded Nyström
//!   method ([`nystrom`]),
//! * and assembles spectrum reports for cones and polyhedra ([`spectra`]).

// quadrature nodes and oracle constants are quoted to their published digits
#![allow(clippy::excessive_precision)]
// negated comparisons are used deliberately so that NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curves;
pub mod error;
pub mod exec;
pub mod geometry;
pub mod mellin;
pub mod nystrom;
pub mod quadrature;
pub mod spectra;

pub use error::{Error, Result};
pub use exec::ExecPolicy;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
