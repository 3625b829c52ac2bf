use alloc::vec::Vec;

use super::{RadialField, RadialGrid};
use crate::{Error, Result};

/// Largest grid for which the dense eigendecomposition is attempted.
pub const SPECTRAL_CAP: usize = 4096;
const EPS_EIG: f64 = 1e-10;

/// Eigenpairs of `-Δ_h`, i.e. of the pencil `(K, W)`.
///
/// Stored in symmetrized form: row `k` of `vectors` is a Euclidean unit
/// vector `y_k` of `W^{-1/2} K W^{-1/2}`; the weighted-orthonormal
/// eigenfunction is `W^{-1/2} y_k`.
#[derive(Clone, Debug)]
pub struct SpectralCache {
    pub eigenvalues: Vec<f64>,
    vectors: Vec<f64>,
    sqrt_w: Vec<f64>,
    rmax: f64,
    dim: usize,
}

pub fn build_spectral_cache(g: &RadialGrid) -> Result<SpectralCache> {
    let n = g.n;
    if n > SPECTRAL_CAP {
        return Err(Error::TooLargeForSpectral { n, cap: SPECTRAL_CAP });
    }
    let sqrt_w: Vec<f64> = g.weights.iter().map(|w| libm::sqrt(*w)).collect();
    let mut d: Vec<f64> = (0..n)
        .map(|j| {
            let left = if j > 0 { g.face[j - 1] } else { 0.0 };
            (left + g.face[j]) / g.weights[j]
        })
        .collect();
    // e[j] couples j and j+1
    let mut e: Vec<f64> =
        (0..n).map(|j| if j + 1 < n { -g.face[j] / (sqrt_w[j] * sqrt_w[j + 1]) } else { 0.0 }).collect();
    let mut z = alloc::vec![0.0; n * n];
    for k in 0..n {
        z[k * n + k] = 1.0;
    }
    tql2(&mut d, &mut e, &mut z, n)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let mut vectors = Vec::with_capacity(n * n);
    let mut eigenvalues = Vec::with_capacity(n);
    for &k in &order {
        let lam = d[k];
        if lam < -EPS_EIG * d[order[n - 1]].abs().max(1.0) {
            return Err(Error::EigenFailure);
        }
        eigenvalues.push(lam.max(0.0));
        vectors.extend_from_slice(&z[k * n..(k + 1) * n]);
    }
    Ok(SpectralCache { eigenvalues, vectors, sqrt_w, rmax: g.rmax, dim: g.dim })
}

impl SpectralCache {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Weighted-orthonormal eigenfunction `k` sampled at the nodes.
    pub fn eigenfunction(&self, k: usize) -> Vec<f64> {
        let n = self.len();
        self.vectors[k * n..(k + 1) * n].iter().zip(&self.sqrt_w).map(|(y, s)| y / s).collect()
    }

    /// Expansion coefficients `c_k = ⟨u, φ_k⟩_w` (real and imaginary parts).
    pub fn coefficients(&self, u: &RadialField) -> Result<Vec<(f64, f64)>> {
        self.check(u)?;
        let n = self.len();
        let (re, im): (Vec<f64>, Vec<f64>) =
            u.values().iter().zip(&self.sqrt_w).map(|(z, s)| (z.re * s, z.im * s)).unzip();
        Ok((0..n)
            .map(|k| {
                let row = &self.vectors[k * n..(k + 1) * n];
                let mut a = 0.0;
                let mut b = 0.0;
                for j in 0..n {
                    a += row[j] * re[j];
                    b += row[j] * im[j];
                }
                (a, b)
            })
            .collect())
    }

    fn check(&self, u: &RadialField) -> Result<()> {
        let g = u.grid();
        if g.n != self.len() || g.rmax != self.rmax || g.dim != self.dim {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }
}

/// `‖u‖²_{Ḣ^s} = Σ λ_k^s |c_k|²`.
pub fn hsc_norm_sq(u: &RadialField, s: f64, cache: &SpectralCache) -> Result<f64> {
    let c = cache.coefficients(u)?;
    Ok(c.iter()
        .zip(&cache.eigenvalues)
        .map(|((a, b), &lam)| {
            let pw = if s == 0.0 { 1.0 } else { libm::pow(lam, s) };
            pw * (a * a + b * b)
        })
        .sum())
}

/// Implicit QL with Wilkinson shifts on a symmetric tridiagonal matrix.
///
/// On entry `d` is the diagonal and `e[j]` the coupling of `j` and `j+1`.
/// On exit `d` holds eigenvalues and row `k` of `z` the eigenvector of
/// `d[k]` (rotations act on rows so memory access stays contiguous).
fn tql2(d: &mut [f64], e: &mut [f64], z: &mut [f64], n: usize) -> Result<()> {
    if n == 1 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 60 {
                    return Err(Error::EigenFailure);
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = libm::hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = libm::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    let (lo, hi) = z.split_at_mut((i + 1) * n);
                    let zi = &mut lo[i * n..];
                    let zi1 = &mut hi[..n];
                    for k in 0..n {
                        let t = zi1[k];
                        zi1[k] = s * zi[k] + c * t;
                        zi[k] = c * zi[k] - s * t;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}
