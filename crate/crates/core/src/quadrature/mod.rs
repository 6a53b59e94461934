//! Quadrature rules shared by the kernel evaluators and the Nyström
//! discretization.

mod gauss_kronrod;
mod rules;

pub use gauss_kronrod::{integrate_panels, Estimate, Tolerance};
pub use rules::{gauss_legendre, lagrange_basis, log_weighted_gauss};
