//! Radial numerics for the focusing inhomogeneous nonlinear Schrodinger equation
//!
//! `i u_t + Δu + |x|^{-b} |u|^{2σ} u = 0` in dimension `N >= 3`, restricted to
//! radial data on a ball with a Dirichlet wall.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, configuration and
//! orchestration live in the `inlslab` crate.

#![no_std]
// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod diagnostics;
mod error;
pub mod evolver;
pub mod grid;
pub mod ground_state;
pub mod params;
pub mod profiles;
mod report;
mod special;

pub use error::{Error, Result};
pub use grid::{make_grid, RadialField, RadialGrid, SpectralCache};
pub use params::{derive_exponents, scaling_transform, PhysParams};
pub use report::CheckReport;

pub use num_complex::Complex64;
