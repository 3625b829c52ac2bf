use std::fs;
use std::path::Path;
use std::process::Command;

use inlslab::campaign::{property_campaign, CampaignKind};
use inlslab::config::parse_config;
use inlslab::experiment::{diagnostics_for, zero_energy_amplitude};
use inlslab::sweep::{sweep, Axes};
use inlslab::{load_config, run_experiment, RunConfig};
use inlslab_core::make_grid;
use inlslab_core::profiles::gaussian;
use serde_json::{json, Value};
use tempfile::tempdir;

fn small_run() -> Value {
    json!({
        "params": {"N": 3, "b": 1.0, "sigma": 0.8},
        "grid": {"rmax": 8.0, "n": 256},
        "evolve": {"t_end": 0.05},
        "initial": {"gaussian": {"amplitude": 0.5, "width": 1.0}},
        "diagnostics": {"snapshot_stride": 5}
    })
}

fn config(v: &Value) -> RunConfig {
    parse_config(&v.to_string()).unwrap()
}

fn read(p: impl AsRef<Path>) -> Vec<u8> {
    fs::read(p.as_ref()).unwrap_or_else(|e| panic!("{}: {e}", p.as_ref().display()))
}

fn sweep_csv(dir: &Path) -> Vec<csv::StringRecord> {
    let mut r = csv::Reader::from_path(dir.join("sweep.csv")).unwrap();
    r.records().map(|x| x.unwrap()).collect()
}

fn column(dir: &Path, name: &str) -> usize {
    let mut r = csv::Reader::from_path(dir.join("sweep.csv")).unwrap();
    r.headers().unwrap().iter().position(|h| h == name).unwrap()
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempdir().unwrap();
    let cfg = config(&small_run());
    run_experiment(&cfg, &tmp.path().join("a")).unwrap();
    run_experiment(&cfg, &tmp.path().join("b")).unwrap();
    for f in ["series.csv", "final_state.csv", "snapshots/index.csv"] {
        assert_eq!(read(tmp.path().join("a").join(f)), read(tmp.path().join("b").join(f)), "{f}");
    }
}

#[test]
fn config_echo_reproduces_the_run() {
    let tmp = tempdir().unwrap();
    let cfg = config(&small_run());
    run_experiment(&cfg, &tmp.path().join("a")).unwrap();
    let echoed = load_config(&tmp.path().join("a/config_echo.json")).unwrap();
    assert_eq!(echoed, cfg);
    run_experiment(&echoed, &tmp.path().join("b")).unwrap();
    assert_eq!(read(tmp.path().join("a/series.csv")), read(tmp.path().join("b/series.csv")));
}

#[test]
fn single_cell_sweep_matches_a_plain_run() {
    let tmp = tempdir().unwrap();
    let template = small_run();
    let mut axes = Axes::new();
    axes.insert("initial.gaussian.amplitude".into(), vec![json!(0.5)]);
    let rows = sweep(&template, &axes, &tmp.path().join("sweep"), 1).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].status, "ok");
    run_experiment(&config(&template), &tmp.path().join("plain")).unwrap();
    assert_eq!(read(tmp.path().join("sweep/cell_0000/series.csv")), read(tmp.path().join("plain/series.csv")));
}

#[test]
fn failed_cells_keep_their_rows() {
    let tmp = tempdir().unwrap();
    let mut axes = Axes::new();
    axes.insert("grid.n".into(), vec![json!(256), json!(4)]);
    axes.insert("initial.gaussian.amplitude".into(), vec![json!(0.5), json!(0.6), json!(0.7)]);
    let rows = sweep(&small_run(), &axes, tmp.path(), 3).unwrap();
    assert_eq!(rows.len(), 6);
    let recs = sweep_csv(tmp.path());
    assert_eq!(recs.len(), 6);
    let status = column(tmp.path(), "status");
    let error = column(tmp.path(), "error");
    let failed: Vec<_> = recs.iter().filter(|r| &r[status] == "failed").collect();
    assert_eq!(failed.len(), 3);
    assert!(failed.iter().all(|r| !r[error].is_empty()));
}

#[test]
fn amplitude_sweep_brackets_the_zero_energy_amplitude() {
    let tmp = tempdir().unwrap();
    let template = json!({
        "params": {"N": 3, "b": 1.0, "sigma": 0.8},
        "grid": {"rmax": 16.0, "n": 2048},
        "evolve": {"t_end": 0.2},
        "initial": {"gaussian": {"amplitude": 1.0, "width": 1.0}},
        "analyze": false
    });
    let mut axes = Axes::new();
    axes.insert("initial.gaussian.amplitude".into(), vec![json!(1.0), json!(3.8)]);
    sweep(&template, &axes, tmp.path(), 2).unwrap();
    let recs = sweep_csv(tmp.path());
    let stop = column(tmp.path(), "stop_reason");
    assert_eq!(&recs[0][stop], "HorizonReached");
    assert_eq!(&recs[1][stop], "BlowupThreshold");

    let cfg = config(&template);
    let g = make_grid(16.0, 2048, 3).unwrap();
    let diag = diagnostics_for(&cfg, cfg.phys().unwrap(), &g).unwrap();
    let a_star = zero_energy_amplitude(&gaussian(&g, 1.0, 1.0), &diag).unwrap();
    assert!(1.0 < a_star && a_star < 3.8, "{a_star}");
}

#[test]
fn beta_follows_the_closed_form_along_b() {
    let tmp = tempdir().unwrap();
    let mut axes = Axes::new();
    axes.insert("params.b".into(), vec![json!(0.25), json!(0.5), json!(1.0)]);
    let mut template = small_run();
    template["evolve"]["t_end"] = json!(0.005);
    let rows = sweep(&template, &axes, tmp.path(), 3).unwrap();
    let betas: Vec<f64> = rows.iter().map(|r| r.beta.unwrap()).collect();
    for (b, beta) in [0.25, 0.5, 1.0].iter().zip(&betas) {
        assert!((beta - 1.2 / (1.6 + b)).abs() < 1e-14);
    }
    assert!(betas.windows(2).all(|w| w[1] < w[0]), "{betas:?}");
}

#[test]
fn single_profile_campaigns_are_reproducible() {
    let cfg = config(&json!({"params": {"N": 3, "b": 1.0, "sigma": 0.8}, "grid": {"rmax": 32.0, "n": 512}}));
    for kind in ["ball_mass", "radial_gn", "gn_sharp", "farah_gn", "rho_scaling"] {
        let k: CampaignKind = kind.parse().unwrap();
        let a = property_campaign(k, &cfg, 1, 7).unwrap();
        let b = property_campaign(k, &cfg, 1, 7).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap(), "{kind}");
        assert_eq!(a.count, 1);
    }
}

fn cli(args: &[&str]) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_inlslab")).args(args).output().unwrap().status.code().unwrap()
}

#[test]
fn exit_codes() {
    let tmp = tempdir().unwrap();
    let write = |name: &str, v: &Value| {
        let p = tmp.path().join(name);
        fs::write(&p, v.to_string()).unwrap();
        p.to_str().unwrap().to_string()
    };
    let ok = write("ok.json", &small_run());
    let out = tmp.path().join("run").to_str().unwrap().to_string();
    assert_eq!(cli(&["evolve", "--config", &ok, "--out", &out]), 0);

    let mut wall = small_run();
    wall["grid"] = json!({"rmax": 3.0, "n": 128});
    wall["initial"] = json!({"gaussian": {"amplitude": 0.5, "width": 1.0}});
    wall["evolve"] = json!({"t_end": 2.0, "boundary_mass_limit": 1e-6});
    let wall = write("wall.json", &wall);
    let out = tmp.path().join("wall").to_str().unwrap().to_string();
    assert_eq!(cli(&["evolve", "--config", &wall, "--out", &out]), 3);

    let mut bad = small_run();
    bad["params"]["sigma"] = json!(1.5);
    let bad = write("bad.json", &bad);
    let out = tmp.path().join("bad").to_str().unwrap().to_string();
    assert_eq!(cli(&["evolve", "--config", &bad, "--out", &out]), 1);
}

#[test]
fn axes_reach_default_fields() {
    let tmp = tempdir().unwrap();
    let mut template = small_run();
    template.as_object_mut().unwrap().remove("initial");
    let mut axes = Axes::new();
    axes.insert("initial.gaussian.amplitude".into(), vec![json!(0.5)]);
    let rows = sweep(&template, &axes, &tmp.path().join("sweep"), 1).unwrap();
    assert_eq!(rows[0].status, "ok", "{}", rows[0].error);
    run_experiment(&config(&small_run()), &tmp.path().join("plain")).unwrap();
    assert_eq!(read(tmp.path().join("sweep/cell_0000/series.csv")), read(tmp.path().join("plain/series.csv")));
}

#[test]
fn ground_state_creates_its_output_directory() {
    let tmp = tempdir().unwrap();
    let cfg =
        write_tmp(tmp.path(), &json!({"params": {"N": 3, "b": 1.0, "sigma": 0.8}, "grid": {"rmax": 32.0, "n": 256}}));
    let out = tmp.path().join("nested/dir/gs.json");
    cli(&["ground-state", "--config", &cfg, "--out", out.to_str().unwrap()]);
    let summary: Value = serde_json::from_slice(&read(&out)).unwrap();
    assert!(summary["gn_constant"].as_f64().unwrap() > 0.0);
    assert!(tmp.path().join("nested/dir").join(summary["profile_csv"].as_str().unwrap()).exists());
}

fn write_tmp(dir: &Path, v: &Value) -> String {
    let p = dir.join("cfg.json");
    fs::write(&p, v.to_string()).unwrap();
    p.to_str().unwrap().to_string()
}
