//! Limiting spectral distributions of random commutator
//! `S⁻ = n⁻¹(X₁X₂* − X₂X₁*)` and anticommutator `S⁺ = n⁻¹(X₁X₂* + X₂X₁*)`
//! matrices with `X_k = Σ^{1/2} Z_k`.
//!
//! * [`solver`] solves the coupled fixed-point equations for a general
//!   covariance spectrum `H` and recovers the Stieltjes transform.
//! * [`identity`] gives the exact Cardano closed form when `Σ = I`.
//! * [`simulate`] draws the ensembles and computes their spectra.
//! * [`stats`] compares empirical spectra with the limiting curves.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod identity;
pub mod io;
pub mod kernels;
pub mod measures;
pub mod quadrature;
pub mod simulate;
pub mod solver;
pub mod stats;

pub use error::{LsdError, Result};
pub use kernels::KernelTag;
pub use measures::{HalfPlanePoint, LsdCurve, SpectralMeasure};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
