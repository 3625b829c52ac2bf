//! Cell-centered radial mesh, quadrature and discrete operators.

mod field;
pub(crate) mod ops;
mod spectral;
mod tridiag;

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

pub use field::RadialField;
pub use ops::{apply_laplacian, grad_norm_sq, radial_derivative, weighted_potential};
pub use spectral::{build_spectral_cache, hsc_norm_sq, SpectralCache, SPECTRAL_CAP};
pub use tridiag::solve_tridiagonal;

use crate::special::{hurwitz_half_neg, sphere_area};
use crate::{Error, Result};

/// Radial mesh `r_j = (j + 1/2) h`, `h = rmax / n`, with the N-dimensional
/// volume element folded into the weights.
#[derive(Clone, Debug)]
pub struct RadialGrid {
    pub rmax: f64,
    pub n: usize,
    pub dim: usize,
    pub h: f64,
    /// Unit sphere area `2 π^{N/2} / Γ(N/2)`.
    pub omega: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// `face[j]` couples node `j` to `j+1`; the last entry is the wall face,
    /// doubled by the Dirichlet ghost value.
    pub(crate) face: Vec<f64>,
}

pub fn make_grid(rmax: f64, n: usize, dim: usize) -> Result<Arc<RadialGrid>> {
    if !(rmax > 0.0) || !rmax.is_finite() {
        return Err(Error::BadGridSpec(format!("rmax must be positive, got {rmax}")));
    }
    if n < 16 {
        return Err(Error::BadGridSpec(format!("n must be at least 16, got {n}")));
    }
    if dim < 3 {
        return Err(Error::BadGridSpec(format!("dimension must be at least 3, got {dim}")));
    }
    Ok(Arc::new(RadialGrid::build(rmax, n, dim)))
}

impl RadialGrid {
    fn build(rmax: f64, n: usize, dim: usize) -> Self {
        let h = rmax / n as f64;
        let omega = sphere_area(dim);
        let p = (dim - 1) as i32;
        let nodes: Vec<f64> = (0..n).map(|j| (j as f64 + 0.5) * h).collect();
        let weights = nodes.iter().map(|&r| omega * libm::pow(r, p as f64) * h).collect();
        let mut face: Vec<f64> = (1..=n).map(|k| omega * libm::pow(k as f64 * h, p as f64) / h).collect();
        face[n - 1] *= 2.0;
        RadialGrid { rmax, n, dim, h, omega, nodes, weights, face }
    }

    /// Same mesh dilated by `factor` (radii multiplied, `n` kept).
    pub fn dilated(&self, factor: f64) -> Arc<RadialGrid> {
        Arc::new(RadialGrid::build(self.rmax * factor, self.n, self.dim))
    }

    pub fn same_as(&self, other: &RadialGrid) -> bool {
        self.n == other.n && self.dim == other.dim && self.rmax == other.rmax
    }

    /// Fraction of cell `j` lying inside `[rlo, rhi]`.
    pub fn cell_fraction(&self, j: usize, rlo: f64, rhi: f64) -> f64 {
        let a = self.nodes[j] - 0.5 * self.h;
        let b = self.nodes[j] + 0.5 * self.h;
        let lo = if rlo > a { rlo } else { a };
        let hi = if rhi < b { rhi } else { b };
        if hi > lo {
            (hi - lo) / self.h
        } else {
            0.0
        }
    }

    /// Indices of cells overlapping `[rlo, rhi]` with their overlap fraction.
    pub fn region(&self, rlo: f64, rhi: f64) -> impl Iterator<Item = (usize, f64)> + '_ {
        let first = libm::floor(rlo / self.h).max(0.0) as usize;
        let last = (libm::ceil(rhi / self.h) as usize).min(self.n);
        (first.min(self.n)..last).filter_map(move |j| {
            let f = self.cell_fraction(j, rlo, rhi);
            (f > 0.0).then_some((j, f))
        })
    }

    /// Quadrature weights for integrands carrying the factor `|x|^{-b}`.
    ///
    /// Midpoint weights, except that the first cell receives the leading
    /// endpoint correction of the midpoint rule for `r^{N-1-b} g(r)`.
    pub fn potential_weights(&self, b: f64) -> Vec<f64> {
        let mut w: Vec<f64> = self.nodes.iter().zip(&self.weights).map(|(&r, &w)| w * libm::pow(r, -b)).collect();
        let g = self.dim as f64 - 1.0 - b;
        w[0] -= self.omega * libm::pow(self.h, 1.0 + g) * hurwitz_half_neg(g);
        w
    }

    /// Volume of the ball of radius `rmax`.
    pub fn ball_volume(&self) -> f64 {
        self.omega * libm::pow(self.rmax, self.dim as f64) / self.dim as f64
    }
}

/// Midpoint value `Σ w_j f_j`.
pub fn integrate(f: &[f64], g: &RadialGrid) -> Result<f64> {
    if f.len() != g.n {
        return Err(Error::LengthMismatch { expected: g.n, got: f.len() });
    }
    Ok(f.iter().zip(&g.weights).map(|(a, w)| a * w).sum())
}

/// `∫_{rlo <= |x| <= rhi} f`, with cut cells weighted by their overlap.
pub fn integrate_region(f: &[f64], g: &RadialGrid, rlo: f64, rhi: f64) -> Result<f64> {
    if f.len() != g.n {
        return Err(Error::LengthMismatch { expected: g.n, got: f.len() });
    }
    Ok(g.region(rlo, rhi).map(|(j, frac)| frac * g.weights[j] * f[j]).sum())
}
