//! Sharp-constant computation from a config.

use std::path::{Path, PathBuf};

use anyhow::Result;
use inlslab_core::ground_state::{minimize_weinstein, GroundStateResult};
use inlslab_core::{make_grid, profiles, Error};
use serde::Serialize;

use crate::config::RunConfig;
use crate::io;

#[derive(Clone, Debug, Serialize)]
pub struct GroundStateSummary {
    pub converged: bool,
    pub gn_constant: f64,
    pub v_lsigmac: f64,
    pub weinstein: f64,
    pub residual: f64,
    pub iterations: usize,
    pub amplitude: f64,
    pub dilation: f64,
    pub profile_rmax: f64,
    pub profile_csv: String,
}

/// Sidecar CSV path: `gs.json` gets `gs_profile.csv`.
pub fn profile_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "gs".into());
    out.with_file_name(format!("{stem}_profile.csv"))
}

/// Minimize from a Gaussian seed on the configured grid and write `out`
/// plus the profile sidecar. Non-convergence still writes the best iterate.
pub fn run_ground_state(cfg: &RunConfig, out: &Path) -> Result<(GroundStateResult, bool)> {
    let p = cfg.phys()?;
    let g = make_grid(cfg.grid.rmax, cfg.grid.n, p.dim)?;
    let seed = profiles::gaussian(&g, 1.0, cfg.ground_state.seed_width);
    let (gs, converged) = match minimize_weinstein(&p, &g, &seed, &cfg.ground_state.options()) {
        Ok(gs) => (gs, true),
        Err(Error::NoConvergence(best)) => (*best, false),
        Err(e) => return Err(e.into()),
    };
    let csv = profile_path(out);
    io::write_field(&csv, &gs.profile)?;
    let summary = GroundStateSummary {
        converged,
        gn_constant: gs.gn_constant,
        v_lsigmac: gs.v_lsigmac,
        weinstein: gs.weinstein,
        residual: gs.residual,
        iterations: gs.iterations,
        amplitude: gs.amplitude,
        dilation: gs.dilation,
        profile_rmax: gs.profile.grid().rmax,
        profile_csv: csv.file_name().unwrap().to_string_lossy().into_owned(),
    };
    io::write_json(out, &summary)?;
    Ok((gs, converged))
}
