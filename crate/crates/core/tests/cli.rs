use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn skybridge(args: &[&str], envs: &[(&str, &Path)], cwd: &Path) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_skybridge"));
    cmd.args(args).current_dir(cwd).env_remove("SKYBRIDGE_OUT");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const COVERAGE: &str = r#"
mode = "coverage"

[flight]
origin = { lat_deg = 40.64, lon_deg = -73.78 }
destination = { lat_deg = 35.0, lon_deg = -72.0 }
timestep_s = 5.0

[constellation]
search_raan_step_deg = 10.0
search_anomaly_step_deg = 10.0
"#;

const CABIN: &str = r#"
mode = "cabin"

[cabin]
angular_sep_deg = 10.0
dump_paths = true
"#;

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn first_line(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn coverage_run_and_report() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "route.toml", COVERAGE);
    let out = d.path().join("run");
    let o = skybridge(
        &["run", cfg.to_str().unwrap(), "--set", "constellation.max_satellites=3", "--out", out.to_str().unwrap()],
        &[],
        d.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(first_line(&out.join("timeline.csv")), "t_s,serving_sat,elevation_deg,slant_range_m");
    assert_eq!(first_line(&out.join("flight_track.csv")), "t_s,lat_deg,lon_deg,alt_m");
    assert_eq!(first_line(&out.join("handovers.csv")), "t_s,from_sat,to_sat,gap_s");

    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    for key in ["coverage_pct", "n_satellites_active", "n_satellites_discarded", "n_handovers", "max_gap_s", "total_gap_s"] {
        assert!(summary.get(key).is_some(), "missing {key}");
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("run_manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["overrides"][0], "constellation.max_satellites=3");
    assert_eq!(manifest["resolved_config"]["constellation"]["max_satellites"], 3);
    assert_eq!(manifest["version"], env!("CARGO_PKG_VERSION"));

    let o = skybridge(&["report", out.to_str().unwrap()], &[], d.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let progress = std::fs::read_to_string(out.join("coverage_progress.csv")).unwrap();
    assert!(progress.starts_with("t_s,cumulative_coverage_pct\n"));
    let last: f64 = progress.lines().last().unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((last - summary["coverage_pct"].as_f64().unwrap()).abs() <= 0.01);
}

#[test]
fn cabin_run_and_report() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "cabin.toml", CABIN);
    let root = d.path().join("root");
    // no --out: output goes under $SKYBRIDGE_OUT/<stem>
    let o = skybridge(&["--threads", "2", "run", cfg.to_str().unwrap()], &[("SKYBRIDGE_OUT", &root)], d.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let out = root.join("cabin");
    let matrix = std::fs::read_to_string(out.join("path_loss_matrix.csv")).unwrap();
    assert!(matrix.starts_with("tx_id,rx_id,best_loss_db,combined_loss_db,n_paths\n"));
    assert_eq!(matrix.lines().count(), 1 + 4 * 120);
    assert_eq!(first_line(&out.join("paths.csv")), "tx_id,rx_id,n_reflections,length_m,loss_db");

    let o = skybridge(&["report", out.to_str().unwrap()], &[], d.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let boxplot = std::fs::read_to_string(out.join("boxplot.csv")).unwrap();
    assert_eq!(boxplot.lines().count(), 1 + 4);
}

#[test]
fn default_output_root() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "tiny.toml", CABIN);
    let o = skybridge(&["run", "tiny.toml"], &[], d.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(d.path().join("out/tiny/run_manifest.json").is_file());
    assert!(cfg.is_file());
}

#[test]
fn validation_errors_exit_2() {
    let d = tempfile::tempdir().unwrap();
    let o = skybridge(&["run", "missing.toml"], &[], d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing.toml"));

    let cfg = write(d.path(), "bad.toml", &CABIN.replace("dump_paths = true", "tracr = \"sbr\""));
    let o = skybridge(&["run", cfg.to_str().unwrap()], &[], d.path());
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("bad.toml") && e.contains("[cabin]") && e.contains("tracr"), "{e}");

    let cfg = write(d.path(), "c.toml", CABIN);
    let o = skybridge(&["run", cfg.to_str().unwrap(), "--set", "cabin.tracer=fdtd"], &[], d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("tracer"));

    let o = skybridge(&["run", cfg.to_str().unwrap(), "--set", "cabin.angular_sep_deg=20"], &[], d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("angular_sep_deg"));

    let o = skybridge(&["report", d.path().to_str().unwrap()], &[], d.path());
    assert_eq!(o.status.code(), Some(2));

    let run = d.path().join("corrupt");
    std::fs::create_dir(&run).unwrap();
    std::fs::write(run.join("run_manifest.json"), "{not json").unwrap();
    let o = skybridge(&["report", run.to_str().unwrap()], &[], d.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_1() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "c.toml", CABIN);
    // the output path runs through a regular file
    let blocker = write(d.path(), "file", "");
    let o = skybridge(&["run", cfg.to_str().unwrap(), "--out", blocker.join("x").to_str().unwrap()], &[], d.path());
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}
