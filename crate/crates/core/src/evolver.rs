//! Strang-split Crank-Nicolson integrator with blow-up detection.

use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::diagnostics::{DiagnosticsSuite, ObservableRecord};
use crate::grid::ops::stiffness_apply;
use crate::grid::{grad_norm_sq, solve_tridiagonal, RadialField, RadialGrid};
use crate::{PhysParams, Result};

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct EvolveConfig {
    pub dt0: f64,
    pub t_end: f64,
    /// Stop once `‖∇u‖` exceeds this multiple of its initial value.
    pub grad_blowup_threshold: f64,
    pub dt_min: f64,
    /// Step bound `adapt_c (λ_u(t)/λ_u(0))²`.
    pub adapt_c: f64,
    /// Step bound `phase_c / max |x|^{-b}|u|^{2σ}`.
    pub phase_c: f64,
    /// Record observables every this many accepted steps.
    pub snapshot_stride: usize,
    /// Keep a copy of the field every this many records (0 keeps none).
    pub field_stride: usize,
    /// Relative mass allowed in the outer 10% of the grid.
    pub boundary_mass_limit: f64,
    /// Relative energy drift beyond which the discrete flow is no longer
    /// trusted; the run stops as a blow-up detection.
    pub energy_guard: f64,
    pub max_steps: u64,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        EvolveConfig {
            dt0: 1e-3,
            t_end: 1.0,
            grad_blowup_threshold: 1e6,
            dt_min: 1e-13,
            adapt_c: 0.1,
            phase_c: 0.1,
            snapshot_stride: 10,
            field_stride: 0,
            boundary_mass_limit: 1e-6,
            energy_guard: 1e-3,
            max_steps: 50_000_000,
        }
    }
}

impl EvolveConfig {
    pub fn validate(&self) -> core::result::Result<(), &'static str> {
        if !(self.dt_min > 0.0) {
            return Err("dt_min must be positive");
        }
        if !(self.dt0 > self.dt_min) {
            return Err("dt0 must exceed dt_min");
        }
        if !(self.t_end > 0.0) {
            return Err("t_end must be positive");
        }
        let positive =
            [self.grad_blowup_threshold, self.adapt_c, self.phase_c, self.boundary_mass_limit, self.energy_guard];
        if positive.iter().any(|x| !(*x > 0.0)) {
            return Err("thresholds must be positive");
        }
        if self.snapshot_stride == 0 {
            return Err("snapshot_stride must be at least 1");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum StopReason {
    HorizonReached,
    BlowupThreshold,
    StepUnderflow,
    BoundaryContamination,
}

impl StopReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            StopReason::HorizonReached => "HorizonReached",
            StopReason::BlowupThreshold => "BlowupThreshold",
            StopReason::StepUnderflow => "StepUnderflow",
            StopReason::BoundaryContamination => "BoundaryContamination",
        }
    }

    pub fn is_blowup(&self) -> bool {
        matches!(self, StopReason::BlowupThreshold | StopReason::StepUnderflow)
    }
}

/// Which guard ended the run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum StopTrigger {
    Horizon,
    GradientGrowth,
    EnergyResolution,
    StepUnderflow,
    BoundaryMass,
    StepBudget,
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub series: Vec<ObservableRecord>,
    pub final_state: RadialField,
    pub stop_reason: StopReason,
    pub trigger: StopTrigger,
    pub t_stop: f64,
    pub steps: u64,
    /// `(t, u)` copies kept every `field_stride` records, plus the final state.
    pub snapshots: Vec<(f64, RadialField)>,
}

/// Reusable workspace for split steps on one grid.
pub struct Stepper {
    grid: Arc<RadialGrid>,
    /// Effective `|x|^{-b}` at each node (potential weight over volume weight).
    coupling: Vec<f64>,
    sigma: f64,
    nonlinear: bool,
    sub: Vec<Complex64>,
    diag: Vec<Complex64>,
    sup: Vec<Complex64>,
    rhs: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl Stepper {
    pub fn new(grid: Arc<RadialGrid>, p: &PhysParams) -> Self {
        let pw = grid.potential_weights(p.b);
        let coupling = pw.iter().zip(&grid.weights).map(|(a, w)| a / w).collect();
        let n = grid.n;
        let z = Complex64::new(0.0, 0.0);
        Stepper {
            grid,
            coupling,
            sigma: p.sigma,
            nonlinear: true,
            sub: alloc::vec![z; n],
            diag: alloc::vec![z; n],
            sup: alloc::vec![z; n],
            rhs: alloc::vec![z; n],
            scratch: alloc::vec![z; n],
        }
    }

    /// Stepper with the nonlinear substeps switched off.
    pub fn linear(grid: Arc<RadialGrid>, p: &PhysParams) -> Self {
        let mut s = Self::new(grid, p);
        s.nonlinear = false;
        s
    }

    fn phase(&self, u: &mut [Complex64], tau: f64) {
        for (z, c) in u.iter_mut().zip(&self.coupling) {
            let theta = tau * c * libm::pow(z.norm_sqr(), self.sigma);
            *z *= Complex64::new(libm::cos(theta), libm::sin(theta));
        }
    }

    /// Crank-Nicolson for `W u_t = -i K u`.
    fn linear_substep(&mut self, u: &mut [Complex64], dt: f64) -> Result<()> {
        let g = &*self.grid;
        let n = g.n;
        let half = Complex64::new(0.0, 0.5 * dt);
        stiffness_apply(g, u, &mut self.rhs);
        for j in 0..n {
            self.rhs[j] = u[j] * g.weights[j] - half * self.rhs[j];
            let left = if j > 0 { g.face[j - 1] } else { 0.0 };
            self.diag[j] = Complex64::new(g.weights[j], 0.0) + half * (left + g.face[j]);
            self.sub[j] = if j > 0 { -half * g.face[j - 1] } else { Complex64::new(0.0, 0.0) };
            self.sup[j] = if j + 1 < n { -half * g.face[j] } else { Complex64::new(0.0, 0.0) };
        }
        solve_tridiagonal(&self.sub, &self.diag, &self.sup, &mut self.rhs, &mut self.scratch)?;
        u.copy_from_slice(&self.rhs);
        Ok(())
    }

    /// One Strang step `N(dt/2) L(dt) N(dt/2)` in place. Negative `dt`
    /// integrates backwards.
    pub fn step_in_place(&mut self, u: &mut [Complex64], dt: f64) -> Result<()> {
        if dt == 0.0 {
            return Ok(());
        }
        if self.nonlinear {
            self.phase(u, 0.5 * dt);
        }
        self.linear_substep(u, dt)?;
        if self.nonlinear {
            self.phase(u, 0.5 * dt);
        }
        Ok(())
    }

    pub fn step(&mut self, u: &RadialField, dt: f64) -> Result<RadialField> {
        u.check_grid(&self.grid)?;
        let mut v = u.values().to_vec();
        self.step_in_place(&mut v, dt)?;
        Ok(RadialField::from_parts(self.grid.clone(), v))
    }
}

/// One split step of size `dt`.
pub fn step(u: &RadialField, dt: f64, p: &PhysParams) -> Result<RadialField> {
    Stepper::new(u.grid().clone(), p).step(u, dt)
}

/// `dt = min(dt0, adapt_c (λ_u/λ_ref)², phase_c / max V)`.
///
/// `reference_grad_sq` is `‖∇u‖²` at the start of the run; the focusing
/// scale enters relative to it.
pub fn adapt_dt(u: &RadialField, p: &PhysParams, cfg: &EvolveConfig, reference_grad_sq: f64) -> f64 {
    let g = u.grid();
    let pw = g.potential_weights(p.b);
    let vmax = crate::diagnostics::max_phase_rate(u, p, &pw);
    dt_from(grad_norm_sq(u), vmax, p, cfg, reference_grad_sq)
}

fn dt_from(grad_sq: f64, vmax: f64, p: &PhysParams, cfg: &EvolveConfig, reference_grad_sq: f64) -> f64 {
    let mut dt = cfg.dt0;
    if reference_grad_sq > 0.0 && grad_sq > 0.0 {
        let rel = libm::pow(reference_grad_sq / grad_sq, 1.0 / (1.0 - p.s_c));
        dt = dt.min(cfg.adapt_c * rel);
    }
    if vmax > 0.0 {
        dt = dt.min(cfg.phase_c / vmax);
    }
    dt
}

/// Integrate from `u0` until a stop condition fires.
pub fn run(u0: &RadialField, p: &PhysParams, cfg: &EvolveConfig, diag: &DiagnosticsSuite) -> Result<RunResult> {
    u0.check_grid(diag.grid())?;
    let grid = u0.grid().clone();
    let n = grid.n;
    let mut stepper = Stepper::new(grid.clone(), p);
    let coupling = stepper.coupling.clone();
    let pot_w = diag.potential_weights();
    let outer: Vec<(usize, f64)> = grid.region(0.9 * grid.rmax, grid.rmax).collect();

    let mut u = u0.values().to_vec();
    let scan = |u: &[Complex64]| -> (f64, f64, f64) {
        // (potential, max phase rate, boundary mass)
        let mut pot = 0.0;
        let mut vmax: f64 = 0.0;
        for j in 0..n {
            let m = u[j].norm_sqr();
            let s = libm::pow(m, p.sigma);
            pot += pot_w[j] * m * s;
            vmax = vmax.max(coupling[j] * s);
        }
        let edge: f64 = outer.iter().map(|&(j, f)| f * grid.weights[j] * u[j].norm_sqr()).sum();
        (pot, vmax, edge)
    };
    let field = |u: &[Complex64]| RadialField::from_parts(grid.clone(), u.to_vec());

    let mut current = field(&u);
    let g0 = grad_norm_sq(&current);
    let mass0 = crate::diagnostics::mass(&current);
    let (pot0, mut vmax, _) = scan(&u);
    let e0 = 0.5 * g0 - pot0 / (2.0 * p.sigma + 2.0);
    let e_scale = e0.abs().max(1e-300);
    let grad_limit = if g0 > 0.0 { cfg.grad_blowup_threshold * libm::sqrt(g0) } else { f64::INFINITY };

    let mut series = alloc::vec![diag.record(0.0, &current)?];
    let mut snapshots = Vec::new();
    if cfg.field_stride > 0 {
        snapshots.push((0.0, current.clone()));
    }
    let mut t = 0.0;
    let mut steps: u64 = 0;
    let mut gs = g0;
    let (stop_reason, trigger) = loop {
        if t >= cfg.t_end {
            break (StopReason::HorizonReached, StopTrigger::Horizon);
        }
        if steps >= cfg.max_steps {
            break (StopReason::StepUnderflow, StopTrigger::StepBudget);
        }
        let dt = dt_from(gs, vmax, p, cfg, g0);
        if dt < cfg.dt_min {
            break (StopReason::StepUnderflow, StopTrigger::StepUnderflow);
        }
        let dt = dt.min(cfg.t_end - t);
        stepper.step_in_place(&mut u, dt)?;
        steps += 1;
        t = if cfg.t_end - (t + dt) <= 1e-12 * cfg.t_end { cfg.t_end } else { t + dt };

        current = field(&u);
        if let Some(j) = u.iter().position(|z| !z.is_finite()) {
            return Err(crate::Error::CorruptedField(j));
        }
        gs = grad_norm_sq(&current);
        let (pot, vm, edge) = scan(&u);
        vmax = vm;
        let energy = 0.5 * gs - pot / (2.0 * p.sigma + 2.0);

        let stop = if mass0 > 0.0 && edge / mass0 > cfg.boundary_mass_limit {
            Some((StopReason::BoundaryContamination, StopTrigger::BoundaryMass))
        } else if libm::sqrt(gs) >= grad_limit {
            Some((StopReason::BlowupThreshold, StopTrigger::GradientGrowth))
        } else if e0 != 0.0 && (energy - e0).abs() / e_scale > cfg.energy_guard {
            Some((StopReason::BlowupThreshold, StopTrigger::EnergyResolution))
        } else {
            None
        };
        if steps % cfg.snapshot_stride as u64 == 0 || stop.is_some() {
            series.push(diag.record(t, &current)?);
            if cfg.field_stride > 0 && (series.len() - 1) % cfg.field_stride == 0 {
                snapshots.push((t, current.clone()));
            }
        }
        if let Some(s) = stop {
            break s;
        }
    };
    if series.last().map(|r| r.t) != Some(t) {
        series.push(diag.record(t, &current)?);
    }
    if cfg.field_stride > 0 && snapshots.last().map(|s| s.0) != Some(t) {
        snapshots.push((t, current.clone()));
    }
    Ok(RunResult { series, final_state: current, stop_reason, trigger, t_stop: t, steps, snapshots })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::mass;
    use crate::{derive_exponents, make_grid};

    fn params() -> PhysParams {
        derive_exponents(3, 1.0, 0.8).unwrap()
    }

    #[test]
    fn zero_step_is_identity() {
        let p = params();
        let g = make_grid(8.0, 128, 3).unwrap();
        let u = RadialField::from_fn(g, |r| Complex64::new((-r * r).exp(), 0.2));
        assert_eq!(step(&u, 0.0, &p).unwrap().values(), u.values());
    }

    #[test]
    fn linear_step_is_unitary_and_reversible() {
        let p = params();
        let g = make_grid(8.0, 256, 3).unwrap();
        let u = RadialField::from_fn(g.clone(), |r| Complex64::new(2.0 * (-r * r).exp(), r * (-r * r).exp()));
        let mut s = Stepper::linear(g, &p);
        let v = s.step(&u, 1e-2).unwrap();
        assert!((mass(&v) - mass(&u)).abs() < 1e-12 * mass(&u));
        let w = s.step(&v, -1e-2).unwrap();
        for (a, b) in w.values().iter().zip(u.values()) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn nonlinear_phase_keeps_modulus() {
        let p = params();
        let g = make_grid(8.0, 64, 3).unwrap();
        let s = Stepper::new(g.clone(), &p);
        let mut v: Vec<Complex64> = g.nodes.iter().map(|r| Complex64::new(3.0 * (-r * r).exp(), 0.0)).collect();
        let before: Vec<f64> = v.iter().map(|z| z.norm()).collect();
        s.phase(&mut v, 0.37);
        for (a, b) in v.iter().zip(&before) {
            assert!((a.norm() - b).abs() < 1e-14 * b.max(1e-300));
        }
    }

    #[test]
    fn step_bound_formula() {
        let p = params();
        let cfg = EvolveConfig::default();
        assert_eq!(dt_from(2.0, 0.0, &p, &cfg, 2.0), cfg.dt0);
        // ‖∇u‖ up 10x: (λ/λ0)² = 10^{-2/(1-s_c)} = 1e-16
        let dt = dt_from(200.0, 0.0, &p, &cfg, 2.0);
        assert!((dt / (cfg.adapt_c * 1e-16) - 1.0).abs() < 1e-10);
        let mut last = f64::INFINITY;
        for k in 1..20 {
            let d = dt_from(2.0 * (1.0 + 0.1 * k as f64), 5.0 * k as f64, &p, &cfg, 2.0);
            assert!(d <= last);
            last = d;
        }
    }

    #[test]
    fn zero_data_reach_horizon() {
        let p = params();
        let g = make_grid(8.0, 64, 3).unwrap();
        let diag = DiagnosticsSuite::new(p, g.clone(), 1.0, alloc::vec![1.0, 2.0], None).unwrap();
        let cfg = EvolveConfig { t_end: 0.05, ..Default::default() };
        let res = run(&RadialField::zeros(g), &p, &cfg, &diag).unwrap();
        assert_eq!(res.stop_reason, StopReason::HorizonReached);
        assert_eq!(res.t_stop, 0.05);
        assert!(res.series.iter().all(|r| r.mass == 0.0 && r.energy == 0.0 && r.grad_sq == 0.0));
        assert!(res.series.windows(2).all(|w| w[0].t < w[1].t));
    }
}
