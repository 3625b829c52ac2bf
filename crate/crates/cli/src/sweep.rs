//! Cartesian parameter sweeps over dotted config paths.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde_json::Value;

use crate::config::RunConfig;
use crate::experiment::run_experiment;

/// Axis name (dotted path into the config) to the values it takes.
pub type Axes = BTreeMap<String, Vec<Value>>;

pub fn default_workers() -> usize {
    std::env::var("INLSLAB_WORKERS")
        .ok()
        .and_then(|s| s.parse().ok())
        .filter(|&n: &usize| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

pub fn set_path(root: &mut Value, path: &str, v: Value) -> Result<()> {
    let mut cur = root;
    let keys: Vec<&str> = path.split('.').collect();
    for (i, k) in keys.iter().enumerate() {
        let Some(obj) = cur.as_object_mut() else {
            bail!("`{}` is not an object", keys[..i].join("."));
        };
        if i + 1 == keys.len() {
            obj.insert(k.to_string(), v);
            return Ok(());
        }
        cur = obj.entry(k.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    bail!("empty axis path")
}

/// Every combination of axis values, last axis fastest.
pub fn cells(axes: &Axes) -> Vec<Vec<(String, Value)>> {
    let mut out: Vec<Vec<(String, Value)>> = vec![Vec::new()];
    for (name, values) in axes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                values.iter().map(move |v| {
                    let mut c = prefix.clone();
                    c.push((name.clone(), v.clone()));
                    c
                })
            })
            .collect();
    }
    out
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CellRow {
    pub values: Vec<String>,
    pub status: String,
    pub stop_reason: String,
    pub t_stop: Option<f64>,
    pub t_star: Option<f64>,
    pub upper_slope: Option<f64>,
    pub gamma_fit: Option<f64>,
    pub rate_lower_const: Option<f64>,
    pub liminf_witness: Option<f64>,
    pub beta: Option<f64>,
    pub error: String,
}

fn run_cell(template: &Value, cell: &[(String, Value)], dir: &Path) -> CellRow {
    let mut row = CellRow { values: cell.iter().map(|(_, v)| v.to_string()).collect(), ..Default::default() };
    let attempt = || -> Result<_> {
        let mut v = template.clone();
        for (k, x) in cell {
            set_path(&mut v, k, x.clone())?;
        }
        let cfg: RunConfig = serde_json::from_value(v)?;
        cfg.validate()?;
        let beta = cfg.phys()?.beta;
        Ok((run_experiment(&cfg, dir)?, beta))
    };
    match attempt() {
        Ok((out, beta)) => {
            row.status = "ok".into();
            row.stop_reason = out.summary.stop_reason.clone();
            row.t_stop = Some(out.summary.t_stop);
            row.beta = Some(beta);
            if let Some(r) = &out.report {
                row.t_star = Some(r.t_star.t_star);
                row.upper_slope = r.upper_slope();
                row.gamma_fit = r.gamma_fit();
                row.rate_lower_const = r.rate_lower_const();
                row.liminf_witness = r.liminf_witness();
            }
            if let Some(e) = &out.summary.analysis_error {
                row.error = format!("analysis: {e}");
            }
        }
        Err(e) => {
            row.status = "failed".into();
            row.error = format!("{e:#}");
        }
    }
    row
}

/// Run every cell under `out/cell_XXXX` with at most `workers` threads and
/// write `out/sweep.csv`, failed cells included.
pub fn sweep(template: &Value, axes: &Axes, out: &Path, workers: usize) -> Result<Vec<CellRow>> {
    if axes.values().any(|v| v.is_empty()) {
        bail!("every axis needs at least one value");
    }
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    // spell out the defaults so axes can address fields the template omits
    let full = serde_json::from_value::<RunConfig>(template.clone()).ok().and_then(|c| serde_json::to_value(c).ok());
    let template = full.as_ref().unwrap_or(template);
    let all = cells(axes);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build()?;
    let rows: Vec<CellRow> = pool.install(|| {
        all.par_iter().enumerate().map(|(i, c)| run_cell(template, c, &out.join(format!("cell_{i:04}")))).collect()
    });
    let mut w = csv::Writer::from_path(out.join("sweep.csv"))?;
    let mut header = vec!["cell".to_string()];
    header.extend(axes.keys().cloned());
    header.extend(
        [
            "status",
            "stop_reason",
            "t_stop",
            "t_star",
            "upper_slope",
            "gamma_fit",
            "rate_lower_const",
            "liminf_witness",
            "beta",
            "error",
        ]
        .map(String::from),
    );
    w.write_record(&header)?;
    let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    for (i, r) in rows.iter().enumerate() {
        let mut rec = vec![i.to_string()];
        rec.extend(r.values.iter().cloned());
        rec.extend([r.status.clone(), r.stop_reason.clone()]);
        rec.extend(
            [r.t_stop, r.t_star, r.upper_slope, r.gamma_fit, r.rate_lower_const, r.liminf_witness, r.beta].map(opt),
        );
        rec.push(r.error.clone());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(rows)
}
