use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn dlsrr(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dlsrr")).args(args).arg("--out").arg(out).output().expect("binary runs")
}

fn report(out: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

fn num(v: &Value, path: &[&str]) -> f64 {
    path.iter().fold(v, |v, k| &v[*k]).as_f64().unwrap_or_else(|| panic!("{path:?} missing"))
}

#[test]
fn impact_europrojectile_16km() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario("impact_europrojectile.toml");
    let o = dlsrr(&["impact", "--scenario", s.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(dir.path());
    let range = num(&r, &["impact", "range_from_release"]) / 1000.0;
    let v = num(&r, &["impact", "impact_speed"]);
    assert!((range - 361.0).abs() <= 0.02 * 361.0, "range {range}");
    assert!((v - 1675.0).abs() <= 0.02 * 1675.0, "impact speed {v}");
    for f in ["ascent.csv", "descent.csv", "report.json"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
}

#[test]
fn impact_from_given_apogee() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("s.toml");
    std::fs::write(
        &file,
        "[rocket]\npreset = \"dlsrr30\"\nburn_time = 50.0\n\
         [launch]\nrelease_altitude = 16000.0\nrelease_speed = 600.0\nfiring_angle = 59.0\n\
         [apogee]\naltitude = 110000.0\nspeed = 1265.0\ndownrange = 0.0\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = dlsrr(&["impact", "--scenario", file.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    assert!(r["ascent"].is_null());
    assert!(r["impact"]["flight_time"].is_null());
    assert!(!out.join("ascent.csv").exists());
    let v = num(&r, &["impact", "impact_speed"]);
    assert!((v - 1675.0).abs() <= 0.02 * 1675.0, "impact speed {v}");
}

#[test]
fn vacuum_ascent_has_no_drag_loss() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario("vacuum.toml");
    let o = dlsrr(&["ascent", "--scenario", s.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let r = report(dir.path());
    assert_eq!(num(&r, &["ascent", "drag_loss"]), 0.0);
    // Without drag the recorded gain is the rocket-equation value to first order in dt.
    let gain = num(&r, &["ascent", "velocity_gain"]);
    assert!((gain - 2100.0 * 2f64.ln()).abs() < 2.0, "{gain}");
}

#[test]
fn optimize_writes_angle_table() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario("optimize.toml");
    let o = dlsrr(&["ascent", "--scenario", s.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let r = report(dir.path());
    let best = num(&r, &["optimization", "best_angle"]);
    assert_eq!(num(&r, &["ascent", "firing_angle"]), best);
    let table = std::fs::read_to_string(dir.path().join("angles.csv")).unwrap();
    assert_eq!(table.lines().count(), 1 + 31);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (cmd, file) in [("thermal", "thermal.toml"), ("sweep", "sweep.toml")] {
        let s = scenario(file);
        for d in [&a, &b] {
            let out = d.path().join(cmd);
            let o = dlsrr(&[cmd, "--scenario", s.to_str().unwrap()], &out);
            assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        }
        let outputs = report(&a.path().join(cmd))["outputs"].as_array().unwrap().clone();
        assert!(outputs.len() >= 3);
        for f in outputs {
            let f = f.as_str().unwrap();
            let x = std::fs::read(a.path().join(cmd).join(f)).unwrap();
            let y = std::fs::read(b.path().join(cmd).join(f)).unwrap();
            assert!(x == y, "{cmd}/{f} differs between runs");
        }
    }
}

#[test]
fn sweep_covers_cross_product() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario("sweep.toml");
    let o = dlsrr(&["sweep", "--scenario", s.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3 * 3 * 2);
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",ok")));
    assert!(dir.path().join("point_017/thermal.csv").is_file());
}

#[test]
fn sweep_point_failure_does_not_abort() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("s.toml");
    // At 2 km/s release the stagnation wall cannot balance within the bracket.
    std::fs::write(
        &file,
        "[rocket]\npreset = \"dlsrr30\"\nburn_time = 30.0\n\
         [launch]\nrelease_altitude = 12000.0\nrelease_speed = 500.0\nfiring_angle = 5.0\n\
         [sweep]\nrelease_altitude = [12000.0]\nrelease_speed = [500.0, 2000.0]\nburn_time = [0.1]\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = dlsrr(&["sweep", "--scenario", file.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    let points = r["sweep"].as_array().unwrap();
    assert_eq!(points.len(), 2);
    assert!(points[0]["error"].is_null());
    assert!(points[1]["error"].as_str().unwrap().contains("bracket"));
    let csv = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().ends_with(",ok"));
}

#[test]
fn dt_and_qk_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario("thermal.toml");
    let s = s.to_str().unwrap();
    let base = dir.path().join("base");
    let fine = dir.path().join("fine");
    assert_eq!(dlsrr(&["thermal", "--scenario", s], &base).status.code(), Some(0));
    let o = dlsrr(&["thermal", "--scenario", s, "--dt", "0.05", "--qk", "klein"], &fine);
    assert_eq!(o.status.code(), Some(0));
    let r = report(&fine);
    assert_eq!(num(&r, &["scenario", "dt"]), 0.05);
    assert_eq!(r["scenario"]["thermal"]["correlation"], "klein");
    let hot = num(&r["thermal"]["stations"][0], &["max_temperature"]);
    let cool = num(&report(&base)["thermal"]["stations"][0], &["max_temperature"]);
    assert!(hot > cool, "klein {hot} vs sutton {cool}");
    let ascent = std::fs::read_to_string(fine.join("ascent.csv")).unwrap();
    assert!(ascent.lines().nth(2).unwrap().starts_with("0.05,"));
}

#[test]
fn tables_exit_code_reflects_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let o = dlsrr(&["tables"], dir.path());
    let r = report(dir.path());
    let all_pass = r["tables"]["all_pass"].as_bool().unwrap();
    assert_eq!(o.status.code(), Some(if all_pass { 0 } else { 3 }));
    let csv = std::fs::read_to_string(dir.path().join("tables.csv")).unwrap();
    assert!(csv.starts_with("table,release_altitude_km,"));
    assert_eq!(csv.lines().count(), 1 + num(&r, &["tables", "cells"]) as usize);
}

#[test]
fn exit_codes_for_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");

    let o = dlsrr(&["ascent"], &out);
    assert_eq!(o.status.code(), Some(1), "missing scenario is a usage error");

    let s = scenario("baseline.toml");
    let o = dlsrr(&["ascent", "--scenario", s.to_str().unwrap(), "--qk", "nope"], &out);
    assert_eq!(o.status.code(), Some(1));

    let o = dlsrr(&["ascent", "--scenario", "/nonexistent/s.toml"], &out);
    assert_eq!(o.status.code(), Some(1));

    let bad = dir.path().join("bad.toml");
    let text = std::fs::read_to_string(&s).unwrap().replace("propellant_fraction = 0.5", "propellant_fraction = 1.2");
    std::fs::write(&bad, text).unwrap();
    let o = dlsrr(&["ascent", "--scenario", bad.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("propellant_fraction"));

    let o = dlsrr(&["ascent", "--scenario", s.to_str().unwrap(), "--dt", "-1"], &out);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn baseline_scenario_runs() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario("baseline.toml");
    let o = dlsrr(&["ascent", "--scenario", s.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let r = report(dir.path());
    assert_eq!(r["tool_version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(num(&r, &["scenario", "rocket", "total_mass"]), 300.0);
    let csv = std::fs::read_to_string(dir.path().join("ascent.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "t,x,y,vx,vy,mass,mach,rho,T_a,F_d,F_t");
}
