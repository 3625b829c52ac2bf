//! Sharp constant of the weighted Gagliardo-Nirenberg inequality.
//!
//! `J(u) = ‖∇u‖² ‖u‖_{L^{σ_c}}^{2σ} / ∫|x|^{-b}|u|^{2σ+2}` is minimized over
//! nonnegative radial profiles by Sobolev-preconditioned projected gradient
//! descent. `J` is invariant under amplitude and dilation; the dilation is
//! pinned by holding the potential-weighted mean radius at a fixed fraction
//! of `rmax` (otherwise the minimizer drifts to grid scale to escape the wall).

use alloc::boxed::Box;
use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::grid::ops::stiffness_apply;
use crate::grid::{grad_norm_sq, weighted_potential, RadialField, RadialGrid};
use crate::{CheckReport, Error, PhysParams, Result};

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct OptimizerOptions {
    pub max_iters: usize,
    /// Stop when the relative decrease of `J` stays below this for
    /// several consecutive iterates.
    pub tolerance: f64,
    pub initial_step: f64,
    pub rearrange_every: usize,
    /// Potential-weighted mean radius held at `scale_fraction * rmax`.
    pub scale_fraction: f64,
    /// Largest acceptable relative residual of the elliptic equation.
    pub residual_tolerance: f64,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        OptimizerOptions {
            max_iters: 20_000,
            tolerance: 1e-8,
            initial_step: 0.1,
            rearrange_every: 25,
            scale_fraction: 1.0 / 128.0,
            residual_tolerance: 0.05,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GroundStateResult {
    /// Minimizer rescaled to solve `ΔV + |x|^{-b}V^{2σ+1} - V^{σ_c-1} = 0`
    /// as well as the scaling family allows; lives on a dilated grid.
    pub profile: RadialField,
    pub v_lsigmac: f64,
    /// `(σ+1) / ‖V‖_{L^{σ_c}}^{2σ}`.
    pub gn_constant: f64,
    /// Minimal value of `J`.
    pub weinstein: f64,
    pub residual: f64,
    pub iterations: usize,
    /// Amplitude and dilation applied to the raw minimizer.
    pub amplitude: f64,
    pub dilation: f64,
    /// `J` after every accepted iterate.
    pub history: Vec<f64>,
}

struct Parts {
    g: f64,
    l: f64,
    p: f64,
}

struct Problem<'a> {
    grid: &'a RadialGrid,
    pw: Vec<f64>,
    sigma: f64,
    sigma_c: f64,
    target: f64,
}

impl Problem<'_> {
    fn parts(&self, u: &[f64]) -> Parts {
        let g = self.grid;
        let n = g.n;
        let mut gs = 0.0;
        for j in 0..n - 1 {
            let d = u[j + 1] - u[j];
            gs += g.face[j] * d * d;
        }
        gs += g.face[n - 1] * u[n - 1] * u[n - 1];
        let mut l = 0.0;
        let mut p = 0.0;
        for j in 0..n {
            let a = u[j].abs();
            l += g.weights[j] * libm::pow(a, self.sigma_c);
            p += self.pw[j] * libm::pow(a, 2.0 * self.sigma + 2.0);
        }
        Parts { g: gs, l, p }
    }

    fn value(&self, u: &[f64]) -> f64 {
        let q = self.parts(u);
        q.g * libm::pow(q.l, 2.0 * self.sigma / self.sigma_c) / q.p
    }

    /// Euclidean gradient of `log J`.
    fn log_gradient(&self, u: &[f64], q: &Parts) -> Vec<f64> {
        let g = self.grid;
        let mut ku = alloc::vec![Complex64::new(0.0, 0.0); g.n];
        let uc: Vec<Complex64> = u.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        stiffness_apply(g, &uc, &mut ku);
        (0..g.n)
            .map(|j| {
                let a = u[j].abs();
                2.0 * ku[j].re / q.g + 2.0 * self.sigma * g.weights[j] * libm::pow(a, self.sigma_c - 2.0) * u[j] / q.l
                    - (2.0 * self.sigma + 2.0) * self.pw[j] * libm::pow(a, 2.0 * self.sigma) * u[j] / q.p
            })
            .collect()
    }

    fn mean_radius(&self, u: &[f64]) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for j in 0..u.len() {
            let q = self.pw[j] * libm::pow(u[j].abs(), 2.0 * self.sigma + 2.0);
            num += self.grid.nodes[j] * q;
            den += q;
        }
        num / den
    }

    fn mean_radius_gradient(&self, u: &[f64]) -> Vec<f64> {
        let s = self.mean_radius(u);
        let den: f64 = (0..u.len()).map(|j| self.pw[j] * libm::pow(u[j].abs(), 2.0 * self.sigma + 2.0)).sum();
        (0..u.len())
            .map(|j| {
                (2.0 * self.sigma + 2.0)
                    * self.pw[j]
                    * libm::pow(u[j].abs(), 2.0 * self.sigma)
                    * u[j]
                    * (self.grid.nodes[j] - s)
                    / den
            })
            .collect()
    }

    /// Solve `(K + μW) x = rhs` with `μ = ‖∇u‖²/‖u‖²`.
    fn precondition(&self, u: &[f64], q: &Parts, rhs: &[f64]) -> Result<Vec<f64>> {
        let g = self.grid;
        let n = g.n;
        let m: f64 = (0..n).map(|j| g.weights[j] * u[j] * u[j]).sum();
        let mu = q.g / m;
        let c = |x: f64| Complex64::new(x, 0.0);
        let diag: Vec<Complex64> =
            (0..n).map(|j| c((if j > 0 { g.face[j - 1] } else { 0.0 }) + g.face[j] + mu * g.weights[j])).collect();
        let sub: Vec<Complex64> = (0..n).map(|j| c(if j > 0 { -g.face[j - 1] } else { 0.0 })).collect();
        let sup: Vec<Complex64> = (0..n).map(|j| c(if j + 1 < n { -g.face[j] } else { 0.0 })).collect();
        let mut x: Vec<Complex64> = rhs.iter().map(|&v| c(v)).collect();
        let mut scratch = alloc::vec![c(0.0); n];
        crate::grid::solve_tridiagonal(&sub, &diag, &sup, &mut x, &mut scratch)?;
        Ok(x.into_iter().map(|z| z.re).collect())
    }

    /// Newton iterations along the preconditioned gradient of the mean radius.
    fn retract(&self, mut u: Vec<f64>) -> Result<Option<Vec<f64>>> {
        for _ in 0..30 {
            let err = self.mean_radius(&u) - self.target;
            if !err.is_finite() {
                return Ok(None);
            }
            if err.abs() <= 1e-13 * self.target {
                return Ok(Some(u));
            }
            let grad = self.mean_radius_gradient(&u);
            let q = self.parts(&u);
            let dir = self.precondition(&u, &q, &grad)?;
            let slope: f64 = grad.iter().zip(&dir).map(|(a, b)| a * b).sum();
            if !(slope > 0.0) {
                return Ok(None);
            }
            let t = err / slope;
            for (x, d) in u.iter_mut().zip(&dir) {
                *x = (*x - t * d).max(0.0);
            }
        }
        Ok(None)
    }
}

/// `J(u)`.
pub fn weinstein_value(u: &RadialField, p: &PhysParams) -> Result<f64> {
    let pot = weighted_potential(u, p, None)?;
    if pot < 1e-300 {
        return Err(Error::DegenerateField("vanishing potential term"));
    }
    let l = crate::diagnostics::lsigmac_norm(u, p);
    Ok(grad_norm_sq(u) * libm::pow(l, 2.0 * p.sigma) / pot)
}

pub fn minimize_weinstein(
    p: &PhysParams,
    g: &Arc<RadialGrid>,
    seed: &RadialField,
    opts: &OptimizerOptions,
) -> Result<GroundStateResult> {
    seed.check_grid(g)?;
    let prob = Problem {
        grid: g,
        pw: g.potential_weights(p.b),
        sigma: p.sigma,
        sigma_c: p.sigma_c,
        target: opts.scale_fraction * g.rmax,
    };
    let start: Vec<f64> = seed.values().iter().map(|z| z.norm()).collect();
    if prob.parts(&start).p < 1e-300 {
        return Err(Error::DegenerateField("seed has no positive part"));
    }
    let mut u = prob.retract(start)?.ok_or(Error::DegenerateField("seed cannot be brought to the reference scale"))?;
    let mut j = prob.value(&u);
    let mut history = alloc::vec![j];
    let mut alpha = opts.initial_step;
    let mut quiet = 0;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iters {
        iterations += 1;
        let q = prob.parts(&u);
        let grad = prob.log_gradient(&u, &q);
        let mut d = prob.precondition(&u, &q, &grad)?;
        let sg = prob.mean_radius_gradient(&u);
        let sq = prob.precondition(&u, &q, &sg)?;
        let c = dot(&sg, &d) / dot(&sg, &sq);
        for (x, y) in d.iter_mut().zip(&sq) {
            *x -= c * y;
        }
        let wn = |v: &[f64]| (0..v.len()).map(|k| g.weights[k] * v[k] * v[k]).sum::<f64>();
        let norm = libm::sqrt(wn(&u) / wn(&d));
        if !norm.is_finite() {
            converged = true;
            break;
        }
        let mut accepted = None;
        while alpha > 1e-14 {
            let trial: Vec<f64> = u.iter().zip(&d).map(|(a, b)| (a - alpha * norm * b).max(0.0)).collect();
            if let Some(v) = prob.retract(trial)? {
                let jv = prob.value(&v);
                if jv < j {
                    accepted = Some((v, jv));
                    break;
                }
            }
            alpha *= 0.5;
        }
        let Some((v, jv)) = accepted else {
            converged = true;
            break;
        };
        let rel = (j - jv) / j;
        u = v;
        j = jv;
        history.push(j);
        alpha = (2.0 * alpha).min(1.0);

        if opts.rearrange_every > 0 && iterations % opts.rearrange_every == 0 {
            let mut sorted = u.clone();
            sorted.sort_by(|a, b| b.total_cmp(a));
            if let Some(s) = prob.retract(sorted)? {
                let js = prob.value(&s);
                if js <= j {
                    u = s;
                    j = js;
                    *history.last_mut().unwrap() = j;
                }
            }
        }
        quiet = if rel < opts.tolerance { quiet + 1 } else { 0 };
        if quiet >= 5 {
            converged = true;
            break;
        }
    }

    let result = finish(p, g, &prob, u, j, iterations, history)?;
    if !converged || result.residual > opts.residual_tolerance {
        return Err(Error::NoConvergence(Box::new(result)));
    }
    Ok(result)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Rescale the raw minimizer so that `‖∇V‖² = P/(σ+1) = L/σ`, which the
/// elliptic equation forces through its Nehari and Pohozaev identities.
fn finish(
    p: &PhysParams,
    g: &Arc<RadialGrid>,
    prob: &Problem,
    u: Vec<f64>,
    j: f64,
    iterations: usize,
    history: Vec<f64>,
) -> Result<GroundStateResult> {
    let q = prob.parts(&u);
    let s = p.sigma;
    // log-scaling: G ~ a² l^{N-2}, P ~ a^{2σ+2} l^{N-b}, L ~ a^{σ_c} l^N
    // (1) (2σ) log a + (2-b) log l = log((σ+1) G / P)
    // (2) (σ_c-2) log a + 2 log l = log(σ G / L)
    let r1 = libm::log((s + 1.0) * q.g / q.p);
    let r2 = libm::log(s * q.g / q.l);
    let (a11, a12, a21, a22) = (2.0 * s, 2.0 - p.b, p.sigma_c - 2.0, 2.0);
    let det = a11 * a22 - a12 * a21;
    let la = (r1 * a22 - a12 * r2) / det;
    let ll = (a11 * r2 - a21 * r1) / det;
    let amplitude = libm::exp(la);
    let dilation = libm::exp(ll);
    let dg = g.dilated(dilation);
    let values = u.iter().map(|&x| Complex64::new(amplitude * x, 0.0)).collect();
    let profile = RadialField::new(dg.clone(), values)?;
    let v_l = crate::diagnostics::lsigmac_norm(&profile, p);
    let residual = elliptic_residual(&profile, p);
    Ok(GroundStateResult {
        profile,
        v_lsigmac: v_l,
        gn_constant: (s + 1.0) / libm::pow(v_l, 2.0 * s),
        weinstein: j,
        residual,
        iterations,
        amplitude,
        dilation,
        history,
    })
}

/// Relative weak residual of `ΔV + |x|^{-b}V^{2σ+1} - V^{σ_c-1} = 0`,
/// measured in the dual norm induced by `K + W`.
pub fn elliptic_residual(v: &RadialField, p: &PhysParams) -> f64 {
    let g = v.grid();
    let n = g.n;
    let pw = g.potential_weights(p.b);
    let mut kv = alloc::vec![Complex64::new(0.0, 0.0); n];
    stiffness_apply(g, v.values(), &mut kv);
    let x: Vec<f64> = v.values().iter().map(|z| z.re).collect();
    let res: Vec<f64> = (0..n)
        .map(|j| {
            let a = x[j].abs();
            -kv[j].re + pw[j] * libm::pow(a, 2.0 * p.sigma) * x[j] - g.weights[j] * libm::pow(a, p.sigma_c - 2.0) * x[j]
        })
        .collect();
    let scale: Vec<f64> = kv.iter().map(|z| z.re).collect();
    let dual = |f: &[f64]| -> f64 {
        let c = |t: f64| Complex64::new(t, 0.0);
        let diag: Vec<Complex64> =
            (0..n).map(|j| c((if j > 0 { g.face[j - 1] } else { 0.0 }) + g.face[j] + g.weights[j])).collect();
        let sub: Vec<Complex64> = (0..n).map(|j| c(if j > 0 { -g.face[j - 1] } else { 0.0 })).collect();
        let sup: Vec<Complex64> = (0..n).map(|j| c(if j + 1 < n { -g.face[j] } else { 0.0 })).collect();
        let mut y: Vec<Complex64> = f.iter().map(|&t| c(t)).collect();
        let mut scratch = alloc::vec![c(0.0); n];
        if crate::grid::solve_tridiagonal(&sub, &diag, &sup, &mut y, &mut scratch).is_err() {
            return f64::NAN;
        }
        libm::sqrt(f.iter().zip(&y).map(|(a, b)| a * b.re).sum::<f64>())
    };
    dual(&res) / dual(&scale)
}

/// `∫|x|^{-b}|u|^{2σ+2} <= C_GN ‖∇u‖² ‖u‖_{L^{σ_c}}^{2σ}` with 2% slack.
pub fn gn_inequality_check(u: &RadialField, p: &PhysParams, gs: &GroundStateResult) -> CheckReport {
    let lhs = weighted_potential(u, p, None).unwrap_or(0.0);
    let l = crate::diagnostics::lsigmac_norm(u, p);
    let rhs = gs.gn_constant * grad_norm_sq(u) * libm::pow(l, 2.0 * p.sigma);
    CheckReport::new(lhs, rhs, 1.02)
}

/// `∫|x|^{-b}|u|^{2σ+2}` against `‖∇u‖^{2σ s_c + 2} ‖u‖_{L²}^{2σ(1-s_c)}`.
pub fn farah_gn_check(u: &RadialField, p: &PhysParams) -> CheckReport {
    let lhs = weighted_potential(u, p, None).unwrap_or(0.0);
    let g = grad_norm_sq(u);
    let m = crate::diagnostics::mass(u);
    let rhs = libm::pow(g, p.sigma * p.s_c + 1.0) * libm::pow(m, p.sigma * (1.0 - p.s_c));
    CheckReport::witness(lhs, rhs)
}

/// Family-wide constant of [`farah_gn_check`] and each profile's ratio to it.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct FamilyFit {
    pub constant: f64,
    pub relative: Vec<f64>,
}

pub fn farah_family_fit(reports: &[CheckReport]) -> FamilyFit {
    let constant = reports.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let relative = reports.iter().map(|r| if constant > 0.0 { r.ratio / constant } else { 0.0 }).collect();
    FamilyFit { constant, relative }
}
