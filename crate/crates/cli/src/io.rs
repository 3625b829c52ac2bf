//! CSV and JSON persistence.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use inlslab_core::analysis::Series;
use inlslab_core::diagnostics::ObservableRecord;
use inlslab_core::evolver::StopReason;
use inlslab_core::{Complex64, RadialField, RadialGrid};
use serde::Serialize;

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(())
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    ensure_parent(path)?;
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(f);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// `r,re,im` rows.
pub fn write_field(path: &Path, u: &RadialField) -> Result<()> {
    ensure_parent(path)?;
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(["r", "re", "im"])?;
    for (r, z) in u.grid().nodes.iter().zip(u.values()) {
        w.write_record([r.to_string(), z.re.to_string(), z.im.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Read an `r,re,im` file and interpolate it onto `grid` (zero past its last radius).
pub fn read_field(path: &Path, grid: &Arc<RadialGrid>) -> Result<RadialField> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["r", "re", "im"] {
        bail!("{}: expected header r,re,im", path.display());
    }
    let mut pts: Vec<(f64, Complex64)> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let num = |k: usize| -> Result<f64> {
            rec[k].trim().parse().with_context(|| format!("{} row {}: bad number {:?}", path.display(), i + 2, &rec[k]))
        };
        pts.push((num(0)?, Complex64::new(num(1)?, num(2)?)));
    }
    if pts.len() < 2 || pts.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        bail!("{}: radii must be strictly increasing with at least two rows", path.display());
    }
    let same = pts.len() == grid.n && pts.iter().zip(&grid.nodes).all(|(p, r)| (p.0 - r).abs() <= 1e-12 * grid.rmax);
    let values =
        if same { pts.iter().map(|p| p.1).collect() } else { grid.nodes.iter().map(|&r| linear_at(&pts, r)).collect() };
    Ok(RadialField::new(grid.clone(), values)?)
}

fn linear_at(pts: &[(f64, Complex64)], r: f64) -> Complex64 {
    if r <= pts[0].0 {
        return pts[0].1;
    }
    if r > pts[pts.len() - 1].0 {
        return Complex64::new(0.0, 0.0);
    }
    let k = pts.partition_point(|p| p.0 < r);
    let (a, b) = (pts[k - 1], pts[k]);
    let s = (r - a.0) / (b.0 - a.0);
    a.1 * (1.0 - s) + b.1 * s
}

pub fn series_header(records: &[ObservableRecord], rho_scales: &[f64]) -> Vec<String> {
    let mut h: Vec<String> =
        ["t", "mass", "energy", "grad_sq", "lsigmac", "hsc", "variance", "lambda", "zR", "zR_prime", "zR_second"]
            .iter()
            .map(|s| s.to_string())
            .collect();
    let scales: Vec<f64> = match records.first() {
        Some(r) => r.rho.iter().map(|x| x.0).collect(),
        None => rho_scales.to_vec(),
    };
    h.extend(scales.iter().map(|r| format!("rho_R{r}")));
    h.push("boundary_mass_frac".into());
    h
}

pub fn write_series(path: &Path, records: &[ObservableRecord], rho_scales: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(series_header(records, rho_scales))?;
    for r in records {
        let mut row = vec![
            r.t,
            r.mass,
            r.energy,
            r.grad_sq,
            r.lsigmac,
            r.hsc,
            r.variance,
            r.lambda,
            r.z_r,
            r.z_r_prime,
            r.z_r_second,
        ];
        row.extend(r.rho.iter().map(|x| x.1));
        row.push(r.boundary_mass_frac);
        w.write_record(row.iter().map(|x| x.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// The columns of `series.csv` that the blow-up fits need.
pub fn read_series(path: &Path, stop_reason: StopReason) -> Result<Series> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name).with_context(|| format!("no column {name}"));
    let idx = [col("t")?, col("grad_sq")?, col("lsigmac")?, col("hsc")?];
    let mut cols: [Vec<f64>; 4] = Default::default();
    for rec in rdr.records() {
        let rec = rec?;
        for (c, &i) in cols.iter_mut().zip(&idx) {
            c.push(rec[i].parse().with_context(|| format!("bad number {:?}", &rec[i]))?);
        }
    }
    let [t, grad_sq, lsigmac, hsc] = cols;
    Ok(Series { stop_reason, t, grad_sq, lsigmac, hsc })
}

pub fn write_xy(path: &Path, pts: &[(f64, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(["x", "y"])?;
    for (x, y) in pts {
        w.write_record([x.to_string(), y.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
