//! Special functions needed by the quadrature rules.

use core::f64::consts::PI;

/// Surface area of the unit sphere in R^N.
pub(crate) fn sphere_area(dim: usize) -> f64 {
    let half = dim as f64 / 2.0;
    2.0 * libm::pow(PI, half) / libm::tgamma(half)
}

const BERNOULLI_OVER_FACT: [f64; 6] =
    [1.0 / 12.0, -1.0 / 720.0, 1.0 / 30240.0, -1.0 / 1209600.0, 1.0 / 47900160.0, -691.0 / 1307674368000.0];

/// Riemann zeta for real `s > 1` by Euler-Maclaurin summation.
pub(crate) fn zeta(s: f64) -> f64 {
    const M: usize = 12;
    let m = M as f64;
    let mut sum = 0.0;
    for k in 1..M {
        sum += libm::pow(k as f64, -s);
    }
    sum += libm::pow(m, 1.0 - s) / (s - 1.0) + 0.5 * libm::pow(m, -s);
    // rising factorial s (s+1) ... (s+2j-2) times M^{-s-2j+1}
    let mut rising = s;
    let mut mpow = libm::pow(m, -s - 1.0);
    for (j, c) in BERNOULLI_OVER_FACT.iter().enumerate() {
        sum += c * rising * mpow;
        let k = 2.0 * j as f64;
        rising *= (s + k + 1.0) * (s + k + 2.0);
        mpow /= m * m;
    }
    sum
}

/// Hurwitz zeta `ζ(-g, 1/2)` for `g > 0`, via `(2^{-g} - 1) ζ(-g)` and the
/// reflection formula.
pub(crate) fn hurwitz_half_neg(g: f64) -> f64 {
    let s = -g;
    let riemann =
        libm::pow(2.0, s) * libm::pow(PI, s - 1.0) * libm::sin(PI * s / 2.0) * libm::tgamma(1.0 - s) * zeta(1.0 - s);
    (libm::pow(2.0, s) - 1.0) * riemann
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_known_values() {
        assert!((zeta(2.0) - PI * PI / 6.0).abs() < 1e-14);
        assert!((zeta(4.0) - PI.powi(4) / 90.0).abs() < 1e-14);
        assert!((zeta(1.5) - 2.612_375_348_685_488).abs() < 1e-12);
    }

    #[test]
    fn hurwitz_at_integers() {
        // ζ(-1, 1/2) = 1/24, ζ(-2, 1/2) = 0, ζ(-3, 1/2) = -7/960
        assert!((hurwitz_half_neg(1.0) - 1.0 / 24.0).abs() < 1e-14);
        assert!(hurwitz_half_neg(2.0).abs() < 1e-14);
        assert!((hurwitz_half_neg(3.0) + 7.0 / 960.0).abs() < 1e-14);
    }

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-13);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-12);
    }
}
