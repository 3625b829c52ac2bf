use std::sync::{Arc, OnceLock};

use inlslab_core::analysis::{
    check_liminf, check_lower_rate, check_upper_integral, estimate_tstar, fit_log_lower, Series,
};
use inlslab_core::diagnostics::{lsigmac_norm, mass, rho_seminorm};
use inlslab_core::evolver::{Stepper, StopReason};
use inlslab_core::grid::{
    apply_laplacian, build_spectral_cache, grad_norm_sq, hsc_norm_sq, integrate, integrate_region, SpectralCache,
};
use inlslab_core::ground_state::weinstein_value;
use inlslab_core::{derive_exponents, make_grid, scaling_transform, Complex64, PhysParams, RadialField, RadialGrid};
use proptest::prelude::*;

fn reference() -> PhysParams {
    derive_exponents(3, 1.0, 0.8).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn gaussian(g: &Arc<RadialGrid>, amp: f64, width: f64) -> RadialField {
    RadialField::from_real(g.clone(), |r| amp * (-(r / width).powi(2)).exp())
}

fn grid(rmax: f64, n: usize) -> Arc<RadialGrid> {
    make_grid(rmax, n, 3).unwrap()
}

/// Smooth complex field built from a few modulated bumps.
fn bumps(g: &Arc<RadialGrid>, coeffs: &[(f64, f64, f64)]) -> RadialField {
    let cs = coeffs.to_vec();
    RadialField::from_fn(g.clone(), move |r| {
        cs.iter().map(|&(a, c, k)| Complex64::from_polar(a * (-(r - c) * (r - c)).exp(), k * r)).sum()
    })
}

fn bump_coeffs() -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    prop::collection::vec((0.1f64..3.0, 0.0f64..4.0, -2.0f64..2.0), 1..4)
}

fn inner(a: &RadialField, b: &RadialField) -> Complex64 {
    a.values().iter().zip(b.values()).zip(&a.grid().weights).map(|((x, y), w)| x * y.conj() * *w).sum()
}

fn spectral() -> &'static (Arc<RadialGrid>, SpectralCache) {
    static CACHE: OnceLock<(Arc<RadialGrid>, SpectralCache)> = OnceLock::new();
    CACHE.get_or_init(|| {
        let g = grid(16.0, 1024);
        let c = build_spectral_cache(&g).unwrap();
        (g, c)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exponent_identity(dim in 3usize..7, bf in 0.01f64..0.99, sf in 0.01f64..0.99) {
        let b = bf * (dim as f64 / 2.0).min(2.0);
        let lo = (2.0 - b) / dim as f64;
        let hi = if dim == 3 { 2.0 - b } else { (2.0 - b) / (dim as f64 - 2.0) };
        let sigma = lo + sf * (hi - lo);
        let p = derive_exponents(dim, b, sigma);
        prop_assume!(p.is_ok());
        let p = p.unwrap();
        prop_assert!((sigma * p.s_c + (2.0 - b) / 2.0 - dim as f64 * sigma / 2.0).abs() < 1e-12);
        prop_assert_eq!(p, derive_exponents(dim, b, sigma).unwrap());
    }

    #[test]
    fn laplacian_is_symmetric(a in bump_coeffs(), b in bump_coeffs()) {
        let g = grid(8.0, 256);
        let cut = |f: RadialField| {
            let mut v = f.into_values();
            let n = v.len();
            v[n - 1] = Complex64::new(0.0, 0.0);
            v[n - 2] = Complex64::new(0.0, 0.0);
            RadialField::new(g.clone(), v).unwrap()
        };
        let u = cut(bumps(&g, &a));
        let v = cut(bumps(&g, &b));
        let lhs = inner(&apply_laplacian(&u), &v);
        let rhs = inner(&u, &apply_laplacian(&v));
        let scale = inner(&apply_laplacian(&u), &apply_laplacian(&u)).norm().sqrt() * inner(&v, &v).norm().sqrt()
            + inner(&u, &u).norm().sqrt() * inner(&apply_laplacian(&v), &apply_laplacian(&v)).norm().sqrt();
        prop_assert!((lhs - rhs).norm() <= 1e-12 * scale);
    }

    #[test]
    fn cellwise_constants_integrate_exactly(vals in prop::collection::vec(-5.0f64..5.0, 64), lo in 0usize..32, len in 1usize..32) {
        let g = grid(4.0, 64);
        let cells = lo..lo + len;
        let exact: f64 = cells.clone().map(|j| vals[j] * g.weights[j]).sum();
        let got = integrate_region(&vals, &g, lo as f64 * g.h, (lo + len) as f64 * g.h).unwrap();
        let scale: f64 = cells.map(|j| (vals[j] * g.weights[j]).abs()).sum();
        prop_assert!((got - exact).abs() <= 1e-13 * scale);
        let whole: f64 = vals.iter().zip(&g.weights).map(|(v, w)| v * w).sum();
        prop_assert_eq!(integrate(&vals, &g).unwrap(), whole);
    }

    #[test]
    fn annuli_add_up_to_mass(a in bump_coeffs(), r0 in 0.05f64..1.0) {
        let g = grid(16.0, 512);
        let u = bumps(&g, &a);
        let m = u.modulus_sq();
        let mut total = integrate_region(&m, &g, 0.0, r0).unwrap();
        let mut r = r0;
        while r < g.rmax {
            total += integrate_region(&m, &g, r, (2.0 * r).min(g.rmax)).unwrap();
            r *= 2.0;
        }
        prop_assert!(rel(total, mass(&u)) < 1e-12);
    }

    #[test]
    fn hsc_monotone_on_high_bands(coeffs in prop::collection::vec(-1.0f64..1.0, 6), s in 0.0f64..1.5, ds in 0.01f64..0.5) {
        let (g, cache) = spectral();
        let first = cache.eigenvalues.iter().position(|&l| l >= 1.0).unwrap();
        let mut v = vec![0.0; g.n];
        for (i, c) in coeffs.iter().enumerate() {
            for (x, e) in v.iter_mut().zip(cache.eigenfunction(first + 3 * i)) {
                *x += c * e;
            }
        }
        prop_assume!(coeffs.iter().any(|c| c.abs() > 1e-3));
        let u = RadialField::new(g.clone(), v.into_iter().map(|x| Complex64::new(x, 0.0)).collect()).unwrap();
        let lo = hsc_norm_sq(&u, s, cache).unwrap();
        let hi = hsc_norm_sq(&u, s + ds, cache).unwrap();
        prop_assert!(hi >= lo * (1.0 - 1e-12));
    }

    #[test]
    fn split_step_conserves_mass(a in bump_coeffs(), dt in 1e-4f64..5e-2) {
        let g = grid(12.0, 512);
        let p = reference();
        let u = bumps(&g, &a);
        let mut st = Stepper::new(g.clone(), &p);
        let v = st.step(&u, dt).unwrap();
        prop_assert!(rel(mass(&v), mass(&u)) <= 1e-12);
    }

    #[test]
    fn linear_step_is_reversible(a in bump_coeffs(), dt in 1e-4f64..1e-1) {
        let g = grid(12.0, 512);
        let p = reference();
        let u = bumps(&g, &a);
        let mut st = Stepper::linear(g.clone(), &p);
        let fwd = st.step(&u, dt).unwrap();
        let back = st.step(&fwd, -dt).unwrap();
        let err: f64 = u.values().iter().zip(back.values()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        let top = u.values().iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-10 * top);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn scaling_preserves_critical_norms(amp in 0.1f64..5.0, width in 1.0f64..2.0, lam in 0.7f64..1.4) {
        let p = reference();
        let (g, cache) = spectral();
        let u = gaussian(g, amp, width);
        let v = scaling_transform(&u, lam, &p).unwrap();
        prop_assert!(rel(lsigmac_norm(&v, &p), lsigmac_norm(&u, &p)) < 1e-3);
        let h0 = hsc_norm_sq(&u, p.s_c, cache).unwrap();
        prop_assert!(rel(hsc_norm_sq(&v, p.s_c, cache).unwrap(), h0) < 1e-3);
        let expected = grad_norm_sq(&u).sqrt() * lam.powf(1.0 - p.s_c);
        prop_assert!(rel(grad_norm_sq(&v).sqrt(), expected) < 1e-3);
    }

    #[test]
    fn weinstein_invariant_under_symmetry(width in 0.75f64..2.0, a in 0.1f64..10.0, lam in 0.6f64..1.6) {
        let p = reference();
        let g = grid(24.0, 4096);
        let u = gaussian(&g, 1.0, width);
        let v = scaling_transform(&u, lam, &p).unwrap().scaled(a);
        let j0 = weinstein_value(&u, &p).unwrap();
        prop_assert!(rel(weinstein_value(&v, &p).unwrap(), j0) < 1e-4);
    }

    #[test]
    fn rho_is_scale_covariant(width in 0.5f64..2.0, centre in 0.0f64..3.0, k in prop::sample::select(vec![-1i32, 1]), r in prop::sample::select(vec![0.5, 1.0, 2.0])) {
        let p = reference();
        let g = grid(32.0, 8192);
        let u = RadialField::from_real(g.clone(), |x| (-((x - centre) / width).powi(2)).exp());
        let lam = 2f64.powi(k);
        let v = scaling_transform(&u, lam, &p).unwrap();
        let a = rho_seminorm(&u, &p, r).unwrap();
        let top = rho_seminorm(&u, &p, 0.25).unwrap();
        // far-tail scales are round-off of the profile's own scale
        prop_assume!(a >= 1e-6 * top);
        prop_assert!(rel(rho_seminorm(&v, &p, r / lam).unwrap(), a) < 1e-3);
    }

    #[test]
    fn rho_nonincreasing_in_scale(a in bump_coeffs(), r in 0.1f64..4.0, j in 0..3i32) {
        let p = reference();
        let g = grid(32.0, 1024);
        let u = bumps(&g, &a);
        let wider = 2f64.powi(j) * r;
        prop_assert!(rho_seminorm(&u, &p, wider).unwrap() <= rho_seminorm(&u, &p, r).unwrap());
    }

    #[test]
    fn tstar_exact_on_linear_lambda(a in 1e-3f64..1e3, t_star in 1e-3f64..10.0) {
        let p = reference();
        let n = 400;
        let t: Vec<f64> = (0..n).map(|i| t_star * (1.0 - 1e-3) * i as f64 / (n - 1) as f64).collect();
        let g: Vec<f64> = t.iter().map(|&x| (a * (t_star - x)).powf(-(1.0 - p.s_c))).collect();
        let s = Series::from_gradient(StopReason::BlowupThreshold, t, g);
        let ts = estimate_tstar(&s, &p).unwrap();
        prop_assert!(rel(ts.t_star, t_star) < 1e-10);
    }

    #[test]
    fn witnesses_are_stride_robust(a in 0.1f64..10.0, t_star in 0.01f64..1.0, gamma in 0.05f64..0.5) {
        let p = reference();
        // geometric sampling of T* - t over six decades
        let n = 3000;
        let d: Vec<f64> = (0..n).map(|i| t_star * 10f64.powf(-6.0 * i as f64 / (n - 1) as f64)).collect();
        let t: Vec<f64> = d.iter().map(|x| t_star - x).collect();
        let g: Vec<f64> = d.iter().map(|&x| (a * x).powf(-(1.0 - p.s_c))).collect();
        let l: Vec<f64> = d.iter().map(|&x| (2.0 + x.ln().abs()).powf(gamma)).collect();
        let mut s = Series::from_gradient(StopReason::BlowupThreshold, t, g);
        s.lsigmac = l;
        let measure = |s: &Series| {
            let ts = estimate_tstar(s, &p).unwrap();
            [
                ts.t_star,
                check_lower_rate(s, ts.t_star, &p).unwrap().value,
                check_liminf(s, ts.t_star, &p).unwrap().value,
                check_upper_integral(s, ts, &p).unwrap().slope,
                fit_log_lower(s, ts, &p).unwrap().gamma,
            ]
        };
        let full = measure(&s);
        prop_assert_eq!(full, measure(&s));
        let half = measure(&s.thinned(2));
        for (x, y) in full.iter().zip(&half) {
            prop_assert!(rel(*y, *x) < 0.02, "{:?} vs {:?}", full, half);
        }
    }
}
