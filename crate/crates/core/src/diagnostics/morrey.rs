use alloc::vec::Vec;

use crate::grid::ops::face_sum;
use crate::grid::{integrate_region, weighted_potential, RadialField};
use crate::{Error, PhysParams, Result};

const QUARTER: [f64; 4] = [1.0, 1.189_207_115_002_721, core::f64::consts::SQRT_2, 1.681_792_830_507_429];

/// Quarter-dyadic ladder `R 2^{k/4}` capped at `cap`.
///
/// Built as `(R 2^m) 2^{r/4}` so that the ladder of `2R` is bitwise a subset
/// of the ladder of `R`.
pub fn quarter_dyadic_ladder(r0: f64, cap: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut octave = r0;
    'outer: loop {
        for q in QUARTER {
            let r = octave * q;
            if r > cap {
                break 'outer;
            }
            out.push(r);
        }
        octave *= 2.0;
    }
    out
}

/// `ρ(u, R) = max_{R' >= R} R'^{-2 s_c} ∫_{R'<=r<=2R'} |u|²` on the ladder.
pub fn rho_seminorm(u: &RadialField, p: &PhysParams, r0: f64) -> Result<f64> {
    let g = u.grid();
    let ladder = quarter_dyadic_ladder(r0, g.rmax / 2.0);
    if !(r0 > 0.0) || ladder.is_empty() {
        return Err(Error::EmptyScaleSet);
    }
    let m = u.modulus_sq();
    let mut best: f64 = 0.0;
    for rp in ladder {
        let a = integrate_region(&m, g, rp, 2.0 * rp)?;
        best = best.max(a * libm::pow(rp, -2.0 * p.s_c));
    }
    Ok(best)
}

/// `R^{-2 s_c} ∫_{|x|<=R} |u|²`.
pub fn ball_mass_scaled(u: &RadialField, p: &PhysParams, r: f64) -> Result<f64> {
    let g = u.grid();
    if !(r > 0.0) || r > g.rmax {
        return Err(Error::BadRegion { rlo: 0.0, rhi: r });
    }
    let m = u.modulus_sq();
    Ok(integrate_region(&m, g, 0.0, r)? * libm::pow(r, -2.0 * p.s_c))
}

/// Ball mass over the squared `L^{σ_c}(B_R)` norm, `R^{-2 s_c}` scaled.
///
/// Hölder bounds it by `|B_1|^{2 s_c / N}`; `None` when `u` vanishes on the ball.
pub fn ball_holder_ratio(u: &RadialField, p: &PhysParams, r: f64) -> Result<Option<f64>> {
    let g = u.grid();
    let scaled = ball_mass_scaled(u, p, r)?;
    let f: Vec<f64> = u.values().iter().map(|z| libm::pow(z.norm(), p.sigma_c)).collect();
    let l = integrate_region(&f, g, 0.0, r)?;
    if l <= 0.0 {
        return Ok(None);
    }
    Ok(Some(scaled / libm::pow(l, 2.0 / p.sigma_c)))
}

/// Analytic Hölder constant `|B_1|^{2 s_c / N}`.
pub fn holder_constant(p: &PhysParams) -> f64 {
    let n = p.dim as f64;
    let unit_ball = crate::special::sphere_area(p.dim) / n;
    libm::pow(unit_ball, 2.0 * p.s_c / n)
}

/// Empirical `C_η` witness for the exterior radial estimate.
///
/// `[∫_{r>=R}|x|^{-b}|u|^{2σ+2} - η ‖∂_r u‖²_{L²(r>=R)}]₊ R^{2(1-s_c)}`
/// divided by `ρ^{(2+σ)/(2-σ)} + ρ^{σ+1}`.
pub fn radial_gn_quotient(u: &RadialField, p: &PhysParams, r: f64, eta: f64) -> Result<f64> {
    let g = u.grid();
    let rho = rho_seminorm(u, p, r)?;
    let pot = weighted_potential(u, p, Some((r.min(g.rmax), g.rmax)))?;
    let grad_out = face_sum(u, |rf| if rf >= r { 1.0 } else { 0.0 });
    let num = (pot - eta * grad_out).max(0.0) * libm::pow(r, 2.0 * (1.0 - p.s_c));
    if num == 0.0 {
        return Ok(0.0);
    }
    if rho <= 1e-300 {
        return Err(Error::DegenerateRho);
    }
    let s = p.sigma;
    Ok(num / (libm::pow(rho, (2.0 + s) / (2.0 - s)) + libm::pow(rho, s + 1.0)))
}
