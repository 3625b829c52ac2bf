//! JSON run configuration.

use std::fs;
use std::path::{Path, PathBuf};

use inlslab_core::evolver::EvolveConfig;
use inlslab_core::ground_state::OptimizerOptions;
use inlslab_core::{derive_exponents, PhysParams};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid `{field}`: {reason}")]
    Validation { field: String, reason: String },
}

fn invalid(field: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Validation { field: field.to_string(), reason: reason.into() }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    #[serde(rename = "N")]
    pub dim: usize,
    pub b: f64,
    pub sigma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub rmax: f64,
    pub n: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection { rmax: 16.0, n: 1024 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolveSection {
    pub dt0: f64,
    pub t_end: f64,
    pub grad_blowup_threshold: f64,
    pub dt_min: f64,
    pub adapt_c: f64,
    pub phase_c: f64,
    pub field_stride: usize,
    pub boundary_mass_limit: f64,
    pub energy_guard: f64,
    pub max_steps: u64,
}

impl Default for EvolveSection {
    fn default() -> Self {
        let d = EvolveConfig::default();
        EvolveSection {
            dt0: d.dt0,
            t_end: d.t_end,
            grad_blowup_threshold: d.grad_blowup_threshold,
            dt_min: d.dt_min,
            adapt_c: d.adapt_c,
            phase_c: d.phase_c,
            field_stride: d.field_stride,
            boundary_mass_limit: d.boundary_mass_limit,
            energy_guard: d.energy_guard,
            max_steps: d.max_steps,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    Gaussian {
        amplitude: f64,
        width: f64,
    },
    Ring {
        amplitude: f64,
        center: f64,
        width: f64,
    },
    /// Gaussian whose amplitude is `factor` times the zero-energy amplitude,
    /// found by bisection on the sign of the energy.
    BisectedGaussian {
        width: f64,
        factor: f64,
    },
    /// CSV with columns `r,re,im`, interpolated onto the grid.
    File(PathBuf),
}

impl Default for InitialSpec {
    fn default() -> Self {
        InitialSpec::Gaussian { amplitude: 0.5, width: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsSection {
    /// Cutoff radius of the localized virial quantities; `rmax/8` if absent.
    #[serde(rename = "R_virial")]
    pub r_virial: Option<f64>,
    pub rho_scales: Vec<f64>,
    pub snapshot_stride: usize,
    /// Track `‖u‖_{Ḣ^{s_c}}`; if absent, only when `n <= 1024`.
    pub hsc: Option<bool>,
}

impl Default for DiagnosticsSection {
    fn default() -> Self {
        DiagnosticsSection { r_virial: None, rho_scales: vec![1.0, 2.0, 4.0], snapshot_stride: 10, hsc: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GroundStateSection {
    pub max_iters: usize,
    pub tolerance: f64,
    pub initial_step: f64,
    pub rearrange_every: usize,
    pub scale_fraction: f64,
    pub residual_tolerance: f64,
    /// Width of the Gaussian seed.
    pub seed_width: f64,
}

impl Default for GroundStateSection {
    fn default() -> Self {
        let o = OptimizerOptions::default();
        GroundStateSection {
            max_iters: o.max_iters,
            tolerance: o.tolerance,
            initial_step: o.initial_step,
            rearrange_every: o.rearrange_every,
            scale_fraction: o.scale_fraction,
            residual_tolerance: o.residual_tolerance,
            seed_width: 1.0,
        }
    }
}

impl GroundStateSection {
    pub fn options(&self) -> OptimizerOptions {
        OptimizerOptions {
            max_iters: self.max_iters,
            tolerance: self.tolerance,
            initial_step: self.initial_step,
            rearrange_every: self.rearrange_every,
            scale_fraction: self.scale_fraction,
            residual_tolerance: self.residual_tolerance,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub params: ParamsSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub evolve: EvolveSection,
    #[serde(default)]
    pub initial: InitialSpec,
    #[serde(default)]
    pub diagnostics: DiagnosticsSection,
    #[serde(default)]
    pub ground_state: GroundStateSection,
    /// Post-process blow-up runs into `report.json`.
    #[serde(default = "yes")]
    pub analyze: bool,
    #[serde(default)]
    pub seed: u64,
}

fn yes() -> bool {
    true
}

impl RunConfig {
    pub fn phys(&self) -> Result<PhysParams, ConfigError> {
        let p = &self.params;
        derive_exponents(p.dim, p.b, p.sigma).map_err(|e| {
            let field = match e.to_string() {
                m if m.contains("sigma =") => "params.sigma",
                m if m.contains("b =") => "params.b",
                _ => "params.N",
            };
            invalid(field, e.to_string())
        })
    }

    pub fn evolve_config(&self) -> EvolveConfig {
        let e = &self.evolve;
        EvolveConfig {
            dt0: e.dt0,
            t_end: e.t_end,
            grad_blowup_threshold: e.grad_blowup_threshold,
            dt_min: e.dt_min,
            adapt_c: e.adapt_c,
            phase_c: e.phase_c,
            snapshot_stride: self.diagnostics.snapshot_stride,
            field_stride: e.field_stride,
            boundary_mass_limit: e.boundary_mass_limit,
            energy_guard: e.energy_guard,
            max_steps: e.max_steps,
        }
    }

    pub fn r_virial(&self) -> f64 {
        self.diagnostics.r_virial.unwrap_or(self.grid.rmax / 8.0)
    }

    pub fn track_hsc(&self) -> bool {
        self.diagnostics.hsc.unwrap_or(self.grid.n <= 1024)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.phys()?;
        inlslab_core::make_grid(self.grid.rmax, self.grid.n, self.params.dim)
            .map_err(|e| invalid("grid", e.to_string()))?;
        self.evolve_config().validate().map_err(|r| invalid("evolve", r))?;
        let r = self.r_virial();
        if !(r > 0.0) || 4.0 * r > self.grid.rmax {
            return Err(invalid("diagnostics.R_virial", format!("4R = {} must lie in (0, rmax]", 4.0 * r)));
        }
        if self.diagnostics.rho_scales.iter().any(|r| !(*r > 0.0)) {
            return Err(invalid("diagnostics.rho_scales", "scales must be positive"));
        }
        if self.track_hsc() && self.grid.n > inlslab_core::grid::SPECTRAL_CAP {
            return Err(invalid(
                "diagnostics.hsc",
                format!("n exceeds the spectral cap {}", inlslab_core::grid::SPECTRAL_CAP),
            ));
        }
        let positive = |x: f64| x.is_finite() && x > 0.0;
        match &self.initial {
            InitialSpec::Gaussian { amplitude, width } | InitialSpec::Ring { amplitude, width, .. } => {
                if !amplitude.is_finite() || !positive(*width) {
                    return Err(invalid("initial", "amplitude must be finite and width positive"));
                }
            }
            InitialSpec::BisectedGaussian { width, factor } => {
                if !positive(*width) || !positive(*factor) {
                    return Err(invalid("initial", "width and factor must be positive"));
                }
            }
            InitialSpec::File(p) => {
                if !p.is_file() {
                    return Err(invalid("initial.file", format!("{} does not exist", p.display())));
                }
            }
        }
        if let InitialSpec::Ring { center, .. } = self.initial {
            if !(center >= 0.0) {
                return Err(invalid("initial.ring.center", "center must be nonnegative"));
            }
        }
        let gs = &self.ground_state;
        if !positive(gs.scale_fraction) || gs.scale_fraction >= 0.5 || !positive(gs.seed_width) {
            return Err(invalid("ground_state", "scale_fraction must lie in (0, 1/2) and seed_width be positive"));
        }
        Ok(())
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    serde_json::from_str(text).map_err(|e| ConfigError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// Parse and validate; relative file paths resolve against the config's directory.
pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    let mut cfg = parse_config(&text)?;
    if let InitialSpec::File(p) = &mut cfg.initial {
        if p.is_relative() {
            if let Some(dir) = path.parent() {
                *p = dir.join(&*p);
            }
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"params": {"N": 3, "b": 1.0, "sigma": 0.8}}"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        c.validate().unwrap();
        assert_eq!(c.grid, GridSection::default());
        assert_eq!(c.evolve_config(), EvolveConfig::default());
        assert_eq!(c.r_virial(), 2.0);
        assert!(c.analyze);
    }

    #[test]
    fn upper_window_bound_is_cited() {
        let c = parse_config(r#"{"params": {"N": 3, "b": 1.0, "sigma": 1.5}}"#).unwrap();
        match c.validate() {
            Err(ConfigError::Validation { field, reason }) => {
                assert_eq!(field, "params.sigma");
                assert!(reason.contains("(2-b)/(N-2) = 1"), "{reason}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicate_and_unknown_keys_are_parse_errors() {
        let dup = r#"{"params": {"N": 3, "b": 1.0, "b": 0.5, "sigma": 0.8}}"#;
        assert!(matches!(parse_config(dup), Err(ConfigError::Parse { line: 1, .. })));
        let unknown = "{\"params\": {\"N\": 3, \"b\": 1.0, \"sigma\": 0.8},\n \"gird\": {}}";
        match parse_config(unknown) {
            Err(ConfigError::Parse { line, message, .. }) => {
                assert_eq!(line, 2);
                assert!(message.contains("gird"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn echo_round_trips() {
        let c = parse_config(
            r#"{"params": {"N": 3, "b": 1.0, "sigma": 0.8},
                "initial": {"ring": {"amplitude": 1.0, "center": 2.0, "width": 0.5}}, "seed": 9}"#,
        )
        .unwrap();
        let echo = serde_json::to_string_pretty(&c).unwrap();
        assert_eq!(parse_config(&echo).unwrap(), c);
    }

    #[test]
    fn missing_file_is_rejected() {
        let c =
            parse_config(r#"{"params": {"N": 3, "b": 1.0, "sigma": 0.8}, "initial": {"file": "/nonexistent.csv"}}"#)
                .unwrap();
        assert!(matches!(c.validate(), Err(ConfigError::Validation { .. })));
    }
}
