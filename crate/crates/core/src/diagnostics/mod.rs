//! Conserved quantities, localized virial quantities and radial semi-norms.

mod cutoff;
mod morrey;
mod observables;
mod virial;

use alloc::sync::Arc;
use alloc::vec::Vec;

pub use cutoff::{build_cutoff, CutoffPhi, PhiJet};
pub use morrey::{
    ball_holder_ratio, ball_mass_scaled, holder_constant, quarter_dyadic_ladder, radial_gn_quotient, rho_seminorm,
};
pub use observables::{boundary_mass_frac, energy, lq_norm, lsigmac_norm, mass, max_phase_rate, variance};
pub use virial::{virial_estimate_check, virial_z, VirialZ};

pub(crate) use observables::potential;

use crate::grid::{grad_norm_sq, hsc_norm_sq, RadialField, RadialGrid, SpectralCache};
use crate::{PhysParams, Result};

/// One time slice of every tracked observable.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ObservableRecord {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub grad_sq: f64,
    pub lsigmac: f64,
    /// `‖u‖_{Ḣ^{s_c}}`; NaN when no spectral cache is attached.
    pub hsc: f64,
    pub variance: f64,
    /// `λ_u = ‖∇u‖^{-1/(1-s_c)}`.
    pub lambda: f64,
    pub z_r: f64,
    pub z_r_prime: f64,
    pub z_r_second: f64,
    /// `(R, ρ(u, R))`; NaN when `R` exceeds `rmax/2`.
    pub rho: Vec<(f64, f64)>,
    pub boundary_mass_frac: f64,
}

/// Everything needed to turn a field into an [`ObservableRecord`].
#[derive(Clone, Debug)]
pub struct DiagnosticsSuite {
    pub params: PhysParams,
    pub cutoff: Arc<CutoffPhi>,
    pub r_virial: f64,
    pub rho_scales: Vec<f64>,
    pub spectral: Option<Arc<SpectralCache>>,
    pot_w: Vec<f64>,
    grid: Arc<RadialGrid>,
}

impl DiagnosticsSuite {
    pub fn new(
        params: PhysParams,
        grid: Arc<RadialGrid>,
        r_virial: f64,
        rho_scales: Vec<f64>,
        spectral: Option<Arc<SpectralCache>>,
    ) -> Result<Self> {
        if !(r_virial > 0.0) || 4.0 * r_virial > grid.rmax {
            return Err(crate::Error::CutoffOutOfDomain { reach: 4.0 * r_virial, rmax: grid.rmax });
        }
        let cutoff = Arc::new(build_cutoff(params.dim)?);
        let pot_w = grid.potential_weights(params.b);
        Ok(DiagnosticsSuite { params, cutoff, r_virial, rho_scales, spectral, pot_w, grid })
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    /// Weights of the `|x|^{-b}` quadrature on this grid.
    pub fn potential_weights(&self) -> &[f64] {
        &self.pot_w
    }

    pub fn energy(&self, u: &RadialField) -> f64 {
        let p = &self.params;
        0.5 * grad_norm_sq(u) - potential(u, p, &self.pot_w) / (2.0 * p.sigma + 2.0)
    }

    pub fn record(&self, t: f64, u: &RadialField) -> Result<ObservableRecord> {
        u.check_grid(&self.grid)?;
        let p = &self.params;
        let grad_sq = grad_norm_sq(u);
        let pot = potential(u, p, &self.pot_w);
        let hsc = match &self.spectral {
            Some(c) => libm::sqrt(hsc_norm_sq(u, p.s_c, c)?),
            None => f64::NAN,
        };
        let vz = virial::virial_z_with(u, p, self.r_virial, &self.cutoff, &self.pot_w)?;
        let rho = self.rho_scales.iter().map(|&r| (r, rho_seminorm(u, p, r).unwrap_or(f64::NAN))).collect();
        Ok(ObservableRecord {
            t,
            mass: mass(u),
            energy: 0.5 * grad_sq - pot / (2.0 * p.sigma + 2.0),
            grad_sq,
            lsigmac: lsigmac_norm(u, p),
            hsc,
            variance: variance(u),
            lambda: p.lambda_from_grad_sq(grad_sq),
            z_r: vz.z,
            z_r_prime: vz.z_prime,
            z_r_second: vz.z_second,
            rho,
            boundary_mass_frac: boundary_mass_frac(u),
        })
    }
}
