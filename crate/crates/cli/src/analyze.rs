//! Post-processing of a finished run directory.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use inlslab_core::analysis::{analyze, tail_indices, upper_integral_curve, BlowupReport, Series};
use inlslab_core::make_grid;

use crate::config::parse_config;
use crate::experiment::{parse_stop_reason, read_snapshots, Summary};
use crate::io;

pub fn load_run(dir: &Path) -> Result<(crate::config::RunConfig, Series)> {
    let echo = fs::read_to_string(dir.join("config_echo.json")).context("reading config_echo.json")?;
    let cfg = parse_config(&echo)?;
    let summary: Summary =
        serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).context("reading summary.json")?)?;
    let stop = parse_stop_reason(&summary.stop_reason)
        .with_context(|| format!("unknown stop reason {}", summary.stop_reason))?;
    let series = io::read_series(&dir.join("series.csv"), stop)?;
    Ok((cfg, series))
}

/// Analyse `run`, write the report to `out`, and with `plots` the figure
/// data next to it under `plots/`. Returns the plot paths written.
pub fn analyze_run(run: &Path, out: &Path, plots: bool) -> Result<(BlowupReport, Vec<PathBuf>)> {
    let (cfg, series) = load_run(run)?;
    let p = cfg.phys()?;
    let grid = make_grid(cfg.grid.rmax, cfg.grid.n, p.dim)?;
    let snaps = read_snapshots(run, &grid)?;
    let report = analyze(&series, &snaps, &p)?;
    io::write_json(out, &report)?;
    let mut written = Vec::new();
    if plots {
        let dir = out.parent().unwrap_or(Path::new(".")).join("plots");
        fs::create_dir_all(&dir)?;
        let ts = report.t_star.t_star;
        let l2: Vec<(f64, f64)> =
            series.t.iter().zip(&series.grad_sq).map(|(&t, &g)| (t, p.lambda_from_grad_sq(g).powi(2))).collect();
        let path = dir.join("lambda_sq_vs_t.csv");
        io::write_xy(&path, &l2)?;
        written.push(path);
        if let Ok((curve, _)) = upper_integral_curve(&series, ts) {
            let pts: Vec<(f64, f64)> = curve.iter().map(|(d, g)| (d.ln(), g.ln())).collect();
            let path = dir.join("log_g_vs_log_dt.csv");
            io::write_xy(&path, &pts)?;
            written.push(path);
        }
        if let Ok(idx) = tail_indices(&series, ts) {
            let pts: Vec<(f64, f64)> =
                idx.iter().map(|&i| ((ts - series.t[i]).ln().abs().ln(), series.lsigmac[i])).collect();
            let path = dir.join("lsigmac_vs_loglog.csv");
            io::write_xy(&path, &pts)?;
            written.push(path);
        }
    }
    Ok((report, written))
}
