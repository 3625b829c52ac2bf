//! Initial data and the randomized radial profile family used by campaigns.

use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{RadialField, RadialGrid};

/// `A exp(-(r/w)²)`.
pub fn gaussian(g: &Arc<RadialGrid>, amplitude: f64, width: f64) -> RadialField {
    RadialField::from_real(g.clone(), |r| amplitude * libm::exp(-(r / width) * (r / width)))
}

/// `A exp(-((r-c)/w)²)`.
pub fn ring(g: &Arc<RadialGrid>, amplitude: f64, center: f64, width: f64) -> RadialField {
    RadialField::from_real(g.clone(), |r| {
        let x = (r - center) / width;
        amplitude * libm::exp(-x * x)
    })
}

/// One bump of a random superposition; `center == 0` is a centered Gaussian.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Bump {
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
}

impl Bump {
    pub fn eval(&self, r: f64) -> f64 {
        let x = (r - self.center) / self.width;
        self.amplitude * libm::exp(-x * x)
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ProfileSpec {
    pub bumps: Vec<Bump>,
}

impl ProfileSpec {
    pub fn eval(&self, r: f64) -> f64 {
        self.bumps.iter().map(|b| b.eval(r)).sum()
    }

    pub fn on(&self, g: &Arc<RadialGrid>) -> RadialField {
        RadialField::from_real(g.clone(), |r| self.eval(r))
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    libm::exp(rng.gen_range(libm::log(lo)..=libm::log(hi)))
}

/// Draw one profile: 1 to 5 bumps, each a centered Gaussian or a ring with
/// equal odds, amplitude in [0.1, 10] and width in [0.25, 4] (log-uniform),
/// ring center uniform in [0, 8].
pub fn random_profile(rng: &mut ChaCha8Rng) -> ProfileSpec {
    let count = rng.gen_range(1..=5);
    let bumps = (0..count)
        .map(|_| {
            let ring = rng.gen_bool(0.5);
            let amplitude = log_uniform(rng, 0.1, 10.0);
            let width = log_uniform(rng, 0.25, 4.0);
            let center = if ring { rng.gen_range(0.0..=8.0) } else { 0.0 };
            Bump { amplitude, center, width }
        })
        .collect();
    ProfileSpec { bumps }
}

/// `count` profiles, fully determined by `seed`.
pub fn profile_family(count: usize, seed: u64) -> Vec<ProfileSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_profile(&mut rng)).collect()
}

/// Centered Gaussians only, amplitude and width drawn as in [`random_profile`].
pub fn gaussian_family(count: usize, seed: u64) -> Vec<ProfileSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let amplitude = log_uniform(&mut rng, 0.1, 10.0);
            let width = log_uniform(&mut rng, 0.25, 4.0);
            ProfileSpec { bumps: alloc::vec![Bump { amplitude, center: 0.0, width }] }
        })
        .collect()
}
