//! Physical parameters and the scaling symmetry.

use alloc::format;

use crate::grid::{integrate, RadialField};
use crate::{Error, Result};

/// `(N, b, σ)` together with the exponents derived from them.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PhysParams {
    #[cfg_attr(feature = "serde", serde(rename = "N"))]
    pub dim: usize,
    pub b: f64,
    pub sigma: f64,
    /// Critical Sobolev index `N/2 - (2-b)/(2σ)`.
    pub s_c: f64,
    /// Critical Lebesgue exponent `2Nσ/(2-b)`.
    pub sigma_c: f64,
    /// Rate exponent `(2-σ)/(σ(N-1)+b)`.
    pub beta: f64,
}

pub fn derive_exponents(dim: usize, b: f64, sigma: f64) -> Result<PhysParams> {
    if dim < 3 {
        return Err(Error::WindowViolation(format!("N = {dim} must be at least 3")));
    }
    if !b.is_finite() || !sigma.is_finite() {
        return Err(Error::WindowViolation(format!("b = {b} and sigma = {sigma} must be finite")));
    }
    let n = dim as f64;
    let b_max = (n / 2.0).min(2.0);
    if !(b > 0.0) {
        return Err(Error::WindowViolation(format!("b = {b} violates the lower bound b > 0")));
    }
    if !(b < b_max) {
        return Err(Error::WindowViolation(format!("b = {b} violates the upper bound b < min(N/2, 2) = {b_max}")));
    }
    let lo = (2.0 - b) / n;
    let hi = (2.0 - b) / (n - 2.0);
    if !(sigma > lo) {
        return Err(Error::WindowViolation(format!("sigma = {sigma} violates the lower bound sigma > (2-b)/N = {lo}")));
    }
    if !(sigma < hi) {
        return Err(Error::WindowViolation(format!(
            "sigma = {sigma} violates the upper bound sigma < (2-b)/(N-2) = {hi}"
        )));
    }
    let s_c = n / 2.0 - (2.0 - b) / (2.0 * sigma);
    let sigma_c = 2.0 * n * sigma / (2.0 - b);
    let beta = (2.0 - sigma) / (sigma * (n - 1.0) + b);
    let checks = [
        (s_c > 0.0 && s_c < 1.0, "0 < s_c < 1"),
        (sigma_c > 2.0, "sigma_c > 2"),
        (beta > 0.0 && beta < 1.0, "0 < beta < 1"),
        (sigma < 2.0, "sigma < 2"),
    ];
    for (ok, what) in checks {
        if !ok {
            return Err(Error::WindowViolation(format!("derived exponents break {what}")));
        }
    }
    Ok(PhysParams { dim, b, sigma, s_c, sigma_c, beta })
}

impl PhysParams {
    /// Amplitude exponent `(2-b)/(2σ)` of the scaling symmetry.
    pub fn alpha(&self) -> f64 {
        (2.0 - self.b) / (2.0 * self.sigma)
    }

    /// `λ_u = ‖∇u‖^{-1/(1-s_c)}` from `‖∇u‖²`.
    pub fn lambda_from_grad_sq(&self, grad_sq: f64) -> f64 {
        libm::pow(grad_sq, -0.5 / (1.0 - self.s_c))
    }

    /// `2β/(1+β)`, the exponent of the space-time upper bound.
    pub fn upper_exponent(&self) -> f64 {
        2.0 * self.beta / (1.0 + self.beta)
    }
}

/// Default mass fraction that may be pushed past the wall by a dilation.
pub const RESAMPLE_LOSS_TOL: f64 = 1e-8;

/// `λ^{(2-b)/(2σ)} u(λ·)` resampled on the grid of `u`.
pub fn scaling_transform(u: &RadialField, lambda: f64, p: &PhysParams) -> Result<RadialField> {
    scaling_transform_with_tol(u, lambda, p, RESAMPLE_LOSS_TOL)
}

/// As [`scaling_transform`] with an explicit tolerance on the mass fraction
/// of `u` beyond `λ rmax` (the part that the dilation pushes off the grid).
pub fn scaling_transform_with_tol(u: &RadialField, lambda: f64, p: &PhysParams, tol: f64) -> Result<RadialField> {
    if lambda == 1.0 {
        return Ok(u.clone());
    }
    let g = u.grid();
    if lambda < 1.0 {
        let m = u.modulus_sq();
        let total = integrate(&m, g)?;
        if total > 0.0 {
            let outside = crate::grid::integrate_region(&m, g, lambda * g.rmax, g.rmax)?;
            if outside / total > tol {
                return Err(Error::ResampleOutOfRange { lost: outside / total });
            }
        }
    }
    let amp = libm::pow(lambda, p.alpha());
    Ok(RadialField::from_fn(g.clone(), |r| u.interpolate(lambda * r) * amp))
}
