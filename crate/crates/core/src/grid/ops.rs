use alloc::vec::Vec;

use num_complex::Complex64;

use super::{RadialField, RadialGrid};
use crate::{Error, PhysParams, Result};

/// `∂_r u`: central differences inside, one-sided second order at both ends.
pub fn radial_derivative(u: &RadialField) -> RadialField {
    let g = u.grid();
    let v = u.values();
    let n = v.len();
    let inv = 1.0 / (2.0 * g.h);
    let mut d = Vec::with_capacity(n);
    d.push((v[0] * -3.0 + v[1] * 4.0 - v[2]) * inv);
    for j in 1..n - 1 {
        d.push((v[j + 1] - v[j - 1]) * inv);
    }
    d.push((v[n - 1] * 3.0 - v[n - 2] * 4.0 + v[n - 3]) * inv);
    RadialField::from_parts(g.clone(), d)
}

/// Stiffness product `K u`, the weak form of `-Δ` (so `Δu = -W^{-1} K u`).
pub(crate) fn stiffness_apply(g: &RadialGrid, v: &[Complex64], out: &mut [Complex64]) {
    let n = g.n;
    let a = &g.face;
    for j in 0..n {
        let mut acc = Complex64::new(0.0, 0.0);
        if j > 0 {
            acc += (v[j] - v[j - 1]) * a[j - 1];
        }
        if j + 1 < n {
            acc += (v[j] - v[j + 1]) * a[j];
        } else {
            acc += v[j] * a[j];
        }
        out[j] = acc;
    }
}

/// Flux-form Laplacian: zero flux through `r = 0`, Dirichlet at `rmax`.
pub fn apply_laplacian(u: &RadialField) -> RadialField {
    let g = u.grid();
    let mut out = alloc::vec![Complex64::new(0.0, 0.0); g.n];
    stiffness_apply(g, u.values(), &mut out);
    for (o, w) in out.iter_mut().zip(&g.weights) {
        *o = -*o / *w;
    }
    RadialField::from_parts(g.clone(), out)
}

/// `‖∇u‖²` as the face quadratic form `Σ a_f |u_{j+1} - u_j|^2`.
///
/// This equals `-⟨Δu, u⟩_w` exactly, which the energy of the time stepper
/// relies on.
pub fn grad_norm_sq(u: &RadialField) -> f64 {
    face_sum(u, |_| 1.0)
}

/// `Σ_f a_f |Δ_f u|^2 m(r_f)` with the wall face included.
pub(crate) fn face_sum(u: &RadialField, m: impl Fn(f64) -> f64) -> f64 {
    let g = u.grid();
    let v = u.values();
    let n = g.n;
    let mut s = 0.0;
    for j in 0..n - 1 {
        s += g.face[j] * (v[j + 1] - v[j]).norm_sqr() * m((j + 1) as f64 * g.h);
    }
    s + g.face[n - 1] * v[n - 1].norm_sqr() * m(g.rmax)
}

/// `∫ |x|^{-b} |u|^{2σ+2}`, optionally restricted to `rlo <= |x| <= rhi`.
pub fn weighted_potential(u: &RadialField, p: &PhysParams, region: Option<(f64, f64)>) -> Result<f64> {
    let g = u.grid();
    let w = g.potential_weights(p.b);
    let e = p.sigma + 1.0;
    let v = u.values();
    match region {
        None => Ok(v.iter().zip(&w).map(|(z, w)| w * libm::pow(z.norm_sqr(), e)).sum()),
        Some((rlo, rhi)) => {
            if !(rlo >= 0.0 && rlo < rhi && rhi <= g.rmax) {
                return Err(Error::BadRegion { rlo, rhi });
            }
            Ok(g.region(rlo, rhi).map(|(j, f)| f * w[j] * libm::pow(v[j].norm_sqr(), e)).sum())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{derive_exponents, make_grid};
    use core::f64::consts::PI;

    fn reference() -> PhysParams {
        derive_exponents(3, 1.0, 0.8).unwrap()
    }

    #[test]
    fn derivative_of_constant_and_quadratic() {
        let g = make_grid(4.0, 64, 3).unwrap();
        let c = radial_derivative(&RadialField::from_real(g.clone(), |_| 3.0));
        assert!(c.values().iter().all(|z| z.norm() < 1e-12));
        let q = radial_derivative(&RadialField::from_real(g.clone(), |r| r * r));
        for (z, r) in q.values().iter().zip(&g.nodes) {
            assert!((z.re - 2.0 * r).abs() < 1e-11);
        }
    }

    #[test]
    fn derivative_converges_at_second_order() {
        let err = |n: usize| {
            let g = make_grid(6.0, n, 3).unwrap();
            let d = radial_derivative(&RadialField::from_real(g.clone(), |r| (-r * r).exp()));
            d.values()
                .iter()
                .zip(&g.nodes)
                .filter(|(_, &r)| r > 0.5 && r < 4.0)
                .map(|(z, &r)| (z.re + 2.0 * r * (-r * r).exp()).abs())
                .fold(0.0, f64::max)
        };
        let ratio = err(512) / err(1024);
        assert!((3.7..4.3).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn laplacian_of_constant_and_square() {
        let g = make_grid(8.0, 256, 3).unwrap();
        let c = apply_laplacian(&RadialField::from_real(g.clone(), |_| 1.0));
        for j in 0..g.n - 1 {
            assert!(c.values()[j].norm() < 1e-10);
        }
        let q = apply_laplacian(&RadialField::from_real(g.clone(), |r| r * r));
        for j in 0..g.n - 1 {
            let r = g.nodes[j];
            assert!((q.values()[j].re - 6.0).abs() < g.h * g.h / (r * r) + 1e-9);
        }
    }

    #[test]
    fn laplacian_pairs_with_gradient_form() {
        let g = make_grid(12.0, 512, 3).unwrap();
        let u = RadialField::from_fn(g.clone(), |r| Complex64::new((-r * r).exp(), 0.3 * r * (-r * r).exp()));
        let lu = apply_laplacian(&u);
        let pairing: f64 =
            lu.values().iter().zip(u.values()).zip(&g.weights).map(|((a, b), w)| w * (a * b.conj()).re).sum();
        let gs = grad_norm_sq(&u);
        assert!((pairing + gs).abs() < 1e-10 * gs);
    }

    #[test]
    fn gaussian_gradient_norm() {
        let g = make_grid(12.0, 2048, 3).unwrap();
        let u = RadialField::from_real(g, |r| (-r * r).exp());
        let exact = 16.0 * PI * 0.375 * PI.sqrt() * 2f64.powf(-2.5);
        assert!((exact - 5.906_103_7).abs() < 1e-6);
        assert!((grad_norm_sq(&u) - exact).abs() / exact < 1e-5);
        assert_eq!(grad_norm_sq(&RadialField::zeros(make_grid(1.0, 16, 3).unwrap())), 0.0);
    }

    #[test]
    fn gaussian_potential() {
        let p = reference();
        let g = make_grid(8.0, 4096, 3).unwrap();
        let u = RadialField::from_real(g.clone(), |r| (-r * r).exp());
        // 4π ∫ r e^{-3.6 r^2} dr = 4π / 7.2
        let exact = 4.0 * PI / 7.2;
        let val = weighted_potential(&u, &p, None).unwrap();
        assert!((val - exact).abs() / exact < 1e-5);
        let coarse = make_grid(12.0, 2048, 3).unwrap();
        let uc = RadialField::from_real(coarse, |r| (-r * r).exp());
        assert!((weighted_potential(&uc, &p, None).unwrap() - exact).abs() / exact < 1e-5);
    }

    #[test]
    fn potential_regions_add_up() {
        let p = reference();
        let g = make_grid(8.0, 256, 3).unwrap();
        let u = RadialField::from_real(g.clone(), |r| (-(r - 1.0) * (r - 1.0)).exp());
        let a = weighted_potential(&u, &p, Some((0.7, 2.31))).unwrap();
        let b = weighted_potential(&u, &p, Some((2.31, 8.0))).unwrap();
        let c = weighted_potential(&u, &p, Some((0.7, 8.0))).unwrap();
        assert!((a + b - c).abs() < 1e-13 * c);
        assert!(matches!(weighted_potential(&u, &p, Some((2.0, 1.0))), Err(Error::BadRegion { .. })));
        assert!(matches!(weighted_potential(&u, &p, Some((0.0, 9.0))), Err(Error::BadRegion { .. })));
        let z = RadialField::zeros(g);
        assert_eq!(weighted_potential(&z, &p, None).unwrap(), 0.0);
    }
}
