//! A single evolution run and its artifacts.

use std::fs;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use anyhow::{Context, Result};
use inlslab_core::analysis::{analyze, BlowupReport, Series};
use inlslab_core::diagnostics::{lsigmac_norm, DiagnosticsSuite};
use inlslab_core::evolver::{run, RunResult, StopReason, StopTrigger};
use inlslab_core::grid::{build_spectral_cache, grad_norm_sq};
use inlslab_core::{make_grid, profiles, PhysParams, RadialField, RadialGrid};
use serde::{Deserialize, Serialize};

use crate::config::{InitialSpec, RunConfig};
use crate::io;

/// Amplitude at which `a · shape` has zero energy, by bisection on the sign.
pub fn zero_energy_amplitude(shape: &RadialField, diag: &DiagnosticsSuite) -> Option<f64> {
    let e = |a: f64| diag.energy(&shape.scaled(a));
    let mut hi = 1.0;
    while e(hi) >= 0.0 {
        hi *= 2.0;
        if hi > 1e12 {
            return None;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if e(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(hi)
}

pub fn diagnostics_for(cfg: &RunConfig, p: PhysParams, grid: &Arc<RadialGrid>) -> Result<DiagnosticsSuite> {
    let spectral = if cfg.track_hsc() { Some(Arc::new(build_spectral_cache(grid)?)) } else { None };
    Ok(DiagnosticsSuite::new(p, grid.clone(), cfg.r_virial(), cfg.diagnostics.rho_scales.clone(), spectral)?)
}

pub fn initial_field(cfg: &RunConfig, grid: &Arc<RadialGrid>, diag: &DiagnosticsSuite) -> Result<RadialField> {
    Ok(match &cfg.initial {
        InitialSpec::Gaussian { amplitude, width } => profiles::gaussian(grid, *amplitude, *width),
        InitialSpec::Ring { amplitude, center, width } => profiles::ring(grid, *amplitude, *center, *width),
        InitialSpec::BisectedGaussian { width, factor } => {
            let shape = profiles::gaussian(grid, 1.0, *width);
            let a = zero_energy_amplitude(&shape, diag).context("energy never turns negative")?;
            shape.scaled(factor * a)
        }
        InitialSpec::File(path) => io::read_field(path, grid)?,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Summary {
    pub stop_reason: String,
    pub trigger: String,
    pub t_stop: f64,
    pub steps: u64,
    pub records: usize,
    pub initial_mass: f64,
    pub initial_energy: f64,
    pub initial_grad_sq: f64,
    pub initial_lsigmac: f64,
    pub mass_drift: f64,
    pub energy_drift: f64,
    /// `‖∇u(t_stop)‖ / ‖∇u(0)‖`.
    pub grad_growth: f64,
    pub final_lsigmac: f64,
    pub final_boundary_mass_frac: f64,
    pub wall_seconds: f64,
    pub analysis_error: Option<String>,
    pub config: RunConfig,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub result: RunResult,
    pub summary: Summary,
    pub report: Option<BlowupReport>,
}

/// 0 for the outcomes an experiment is after, 3 when the wall contaminated the run.
pub fn exit_code(stop: StopReason) -> i32 {
    match stop {
        StopReason::HorizonReached | StopReason::BlowupThreshold | StopReason::StepUnderflow => 0,
        StopReason::BoundaryContamination => 3,
    }
}

pub fn parse_stop_reason(s: &str) -> Option<StopReason> {
    [
        StopReason::HorizonReached,
        StopReason::BlowupThreshold,
        StopReason::StepUnderflow,
        StopReason::BoundaryContamination,
    ]
    .into_iter()
    .find(|r| r.as_str() == s)
}

fn trigger_name(t: StopTrigger) -> String {
    serde_json::to_value(t).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}

/// Evolve and analyse without touching the disk.
pub fn evolve(cfg: &RunConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let started = Instant::now();
    let p = cfg.phys()?;
    let grid = make_grid(cfg.grid.rmax, cfg.grid.n, p.dim)?;
    let diag = diagnostics_for(cfg, p, &grid)?;
    let u0 = initial_field(cfg, &grid, &diag)?;
    let result = run(&u0, &p, &cfg.evolve_config(), &diag)?;

    let first = &result.series[0];
    let last = result.series.last().unwrap_or(first);
    let rel = |a: f64, b: f64| if b != 0.0 { (a - b).abs() / b.abs() } else { (a - b).abs() };
    let mut report = None;
    let mut analysis_error = None;
    if cfg.analyze && result.stop_reason.is_blowup() {
        let s = Series::from_records(result.stop_reason, &result.series);
        match analyze(&s, &result.snapshots, &p) {
            Ok(r) => report = Some(r),
            Err(e) => analysis_error = Some(e.to_string()),
        }
    }
    let g0 = grad_norm_sq(&u0);
    let summary = Summary {
        stop_reason: result.stop_reason.as_str().to_string(),
        trigger: trigger_name(result.trigger),
        t_stop: result.t_stop,
        steps: result.steps,
        records: result.series.len(),
        initial_mass: first.mass,
        initial_energy: first.energy,
        initial_grad_sq: g0,
        initial_lsigmac: lsigmac_norm(&u0, &p),
        mass_drift: rel(last.mass, first.mass),
        energy_drift: rel(last.energy, first.energy),
        grad_growth: if g0 > 0.0 { (last.grad_sq / g0).sqrt() } else { 1.0 },
        final_lsigmac: last.lsigmac,
        final_boundary_mass_frac: last.boundary_mass_frac,
        wall_seconds: started.elapsed().as_secs_f64(),
        analysis_error,
        config: cfg.clone(),
    };
    Ok(RunOutcome { result, summary, report })
}

pub fn write_artifacts(cfg: &RunConfig, out: &RunOutcome, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir.join("snapshots")).with_context(|| format!("creating {}", dir.display()))?;
    io::write_json(&dir.join("config_echo.json"), cfg)?;
    io::write_series(&dir.join("series.csv"), &out.result.series, &cfg.diagnostics.rho_scales)?;
    io::write_field(&dir.join("final_state.csv"), &out.result.final_state)?;
    let mut index = csv::Writer::from_path(dir.join("snapshots").join("index.csv"))?;
    index.write_record(["index", "t", "file"])?;
    for (k, (t, u)) in out.result.snapshots.iter().enumerate() {
        let name = format!("snap_{k:05}.csv");
        io::write_field(&dir.join("snapshots").join(&name), u)?;
        index.write_record([k.to_string(), t.to_string(), name])?;
    }
    index.flush()?;
    io::write_json(&dir.join("summary.json"), &out.summary)?;
    if let Some(r) = &out.report {
        io::write_json(&dir.join("report.json"), r)?;
    }
    Ok(())
}

pub fn run_experiment(cfg: &RunConfig, dir: &Path) -> Result<RunOutcome> {
    let out = evolve(cfg)?;
    write_artifacts(cfg, &out, dir)?;
    Ok(out)
}

/// Snapshots written by [`write_artifacts`].
pub fn read_snapshots(dir: &Path, grid: &Arc<RadialGrid>) -> Result<Vec<(f64, RadialField)>> {
    let path = dir.join("snapshots").join("index.csv");
    if !path.exists() {
        return Ok(Vec::new());
    }
    let mut rdr = csv::Reader::from_path(&path)?;
    let mut snaps = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let t: f64 = rec[1].parse()?;
        snaps.push((t, io::read_field(&dir.join("snapshots").join(&rec[2]), grid)?));
    }
    Ok(snaps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn small(extra: &str) -> RunConfig {
        parse_config(&format!(
            r#"{{"params": {{"N": 3, "b": 1.0, "sigma": 0.8}}, "grid": {{"rmax": 8.0, "n": 128}},
                "evolve": {{"t_end": 0.05}} {extra}}}"#
        ))
        .unwrap()
    }

    #[test]
    fn zero_data_reach_horizon() {
        let cfg = small(r#", "initial": {"gaussian": {"amplitude": 0.0, "width": 1.0}}"#);
        let out = evolve(&cfg).unwrap();
        assert_eq!(out.result.stop_reason, StopReason::HorizonReached);
        assert!(out.result.series.iter().all(|r| r.mass == 0.0 && r.grad_sq == 0.0));
        assert_eq!(exit_code(out.result.stop_reason), 0);
    }

    #[test]
    fn bisected_amplitude_has_zero_energy() {
        let cfg = small("");
        let p = cfg.phys().unwrap();
        let g = make_grid(8.0, 256, 3).unwrap();
        let diag = diagnostics_for(&cfg, p, &g).unwrap();
        let shape = profiles::gaussian(&g, 1.0, 1.0);
        let a = zero_energy_amplitude(&shape, &diag).unwrap();
        // closed form: a^{2σ} = (σ+1) ‖∇φ‖² / P(φ)
        let gs = grad_norm_sq(&shape);
        let pot = inlslab_core::grid::weighted_potential(&shape, &p, None).unwrap();
        let exact = (1.8 * gs / pot).powf(1.0 / 1.6);
        assert!((a / exact - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stop_reason_names_round_trip() {
        for r in [StopReason::HorizonReached, StopReason::BoundaryContamination] {
            assert_eq!(parse_stop_reason(r.as_str()), Some(r));
        }
        assert_eq!(exit_code(StopReason::BoundaryContamination), 3);
    }
}
