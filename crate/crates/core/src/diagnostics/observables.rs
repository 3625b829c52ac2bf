use alloc::vec::Vec;

use crate::grid::{grad_norm_sq, integrate, integrate_region, RadialField};
use crate::PhysParams;

/// `∫|u|²`.
pub fn mass(u: &RadialField) -> f64 {
    u.values().iter().zip(&u.grid().weights).map(|(z, w)| w * z.norm_sqr()).sum()
}

/// `½‖∇u‖² - ∫|x|^{-b}|u|^{2σ+2} / (2σ+2)`.
pub fn energy(u: &RadialField, p: &PhysParams) -> f64 {
    let pot = potential(u, p, &u.grid().potential_weights(p.b));
    0.5 * grad_norm_sq(u) - pot / (2.0 * p.sigma + 2.0)
}

/// Potential term with precomputed weights from `RadialGrid::potential_weights`.
pub(crate) fn potential(u: &RadialField, p: &PhysParams, w: &[f64]) -> f64 {
    let e = p.sigma + 1.0;
    u.values().iter().zip(w).map(|(z, w)| w * libm::pow(z.norm_sqr(), e)).sum()
}

/// `‖u‖_{L^q}`.
pub fn lq_norm(u: &RadialField, q: f64) -> f64 {
    let f: Vec<f64> = u.values().iter().map(|z| libm::pow(z.norm(), q)).collect();
    libm::pow(integrate(&f, u.grid()).unwrap_or(0.0), 1.0 / q)
}

/// `‖u‖_{L^{σ_c}}`.
pub fn lsigmac_norm(u: &RadialField, p: &PhysParams) -> f64 {
    lq_norm(u, p.sigma_c)
}

/// `∫|x|²|u|²`.
pub fn variance(u: &RadialField) -> f64 {
    let g = u.grid();
    u.values().iter().zip(&g.weights).zip(&g.nodes).map(|((z, w), r)| w * r * r * z.norm_sqr()).sum()
}

/// Fraction of the mass in the outer 10% of the grid.
pub fn boundary_mass_frac(u: &RadialField) -> f64 {
    let g = u.grid();
    let m = u.modulus_sq();
    let total = integrate(&m, g).unwrap_or(0.0);
    if total <= 0.0 {
        return 0.0;
    }
    integrate_region(&m, g, 0.9 * g.rmax, g.rmax).unwrap_or(0.0) / total
}

/// Largest nonlinear phase rate `|x|^{-b}|u|^{2σ}` over the nodes, measured
/// with the same effective weight as the potential quadrature.
pub fn max_phase_rate(u: &RadialField, p: &PhysParams, pot_w: &[f64]) -> f64 {
    let g = u.grid();
    u.values()
        .iter()
        .zip(pot_w)
        .zip(&g.weights)
        .map(|((z, pw), w)| pw / w * libm::pow(z.norm_sqr(), p.sigma))
        .fold(0.0, f64::max)
}
