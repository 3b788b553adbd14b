use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use delaygeo::networks::{carfollowing_tc, crossing_parameter, ring_eigenvalue};
use delaygeo::{systems, DelayKernel};
use serde_json::Value;
use tempfile::TempDir;

struct Run {
    out: PathBuf,
    output: Output,
}

impl Run {
    fn code(&self) -> i32 {
        self.output.status.code().unwrap_or(-1)
    }

    fn read(&self, name: &str) -> String {
        fs::read_to_string(self.out.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
    }

    fn json(&self, name: &str) -> Value {
        serde_json::from_str(&self.read(name)).unwrap()
    }

    fn csv(&self, name: &str) -> Vec<Vec<f64>> {
        self.read(name)
            .lines()
            .skip(1)
            .map(|l| l.split(',').map(|x| x.parse().unwrap_or(f64::NAN)).collect())
            .collect()
    }
}

fn run_in(dir: &Path, tag: &str, args: &[&str], config: &str) -> Run {
    let cfg = dir.join(format!("{tag}.json"));
    fs::write(&cfg, config).unwrap();
    let out = dir.join(tag);
    let output = Command::new(env!("CARGO_BIN_EXE_delaygeo"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    Run { out, output }
}

fn run(args: &[&str], config: &str) -> (TempDir, Run) {
    let dir = tempfile::tempdir().unwrap();
    let r = run_in(dir.path(), "run", args, config);
    (dir, r)
}

fn numap_labels(r: &Run) -> Vec<i64> {
    let mut v: Vec<i64> = r.csv("numap.csv").iter().map(|row| row[2] as i64).filter(|&x| x >= 0).collect();
    v.sort_unstable();
    v.dedup();
    v
}

#[test]
fn scc_example1_passes_through_minus_one() {
    let (_d, r) = run(&["scc"], r#"{"system":{"preset":"example1"},"beta":[-10,10],"step":0.01}"#);
    assert_eq!(r.code(), 0, "{}", String::from_utf8_lossy(&r.output.stderr));
    assert!(!r.out.join("branch_001.csv").exists());
    let rows = r.csv("branch_000.csv");
    let zero = rows.iter().find(|row| row[0].abs() < 1e-12).expect("a beta = 0 row");
    assert!((zero[1] + 1.0).abs() < 1e-12 && zero[2].abs() < 1e-12);
}

#[test]
fn scc_example5_theta_prime_minimum() {
    let (_d, r) = run(&["scc"], r#"{"system":{"preset":"example5","a":1,"tau":0.5,"d":0},"beta":[-10,10]}"#);
    assert_eq!(r.code(), 0);
    let rows = r.csv("branch_000.csv");
    let min = rows.iter().min_by(|a, b| a[5].total_cmp(&b[5])).unwrap();
    // θ′(β) = τ − a/(a² + β²), smallest at β = 0
    assert!((min[5] - (0.5 - 1.0)).abs() < 1e-9);
    assert!(min[0].abs() < 1e-9);
}

#[test]
fn malformed_config_exits_2() {
    let (_d, r) = run(&["scc"], r#"{"system": {"preset": "example1""#);
    assert_eq!(r.code(), 2);
    assert!(String::from_utf8_lossy(&r.output.stderr).contains("invalid configuration"));
    let (_d, r) = run(&["scc"], r#"{"system":{"preset":"example1"},"colour":"red"}"#);
    assert_eq!(r.code(), 2);
    let (_d, r) = run(&["numap"], r#"{"system":{"preset":"example1"},"window":[1,-1,0,1]}"#);
    assert_eq!(r.code(), 2);
}

#[test]
fn simulate_zero_horizon_exits_2() {
    let (_d, r) = run(
        &["simulate"],
        r#"{"system":{"kind":"scalar_discrete","a":1,"L":[-2,0],"tau":0.5},"sim":{"dt":0.01,"horizon":0}}"#,
    );
    assert_eq!(r.code(), 2);
    assert!(!r.out.exists());
}

#[test]
fn simulate_writes_trajectory_and_rate() {
    let (_d, r) = run(
        &["simulate"],
        r#"{"system":{"kind":"scalar_discrete","a":1,"L":[-1.5,0],"tau":0.5},"sim":{"dt":0.01,"horizon":30}}"#,
    );
    assert_eq!(r.code(), 0);
    let rate = r.json("rate.json");
    assert_eq!(rate["verdict"], "converging");
    assert!(r.read("trajectory.csv").starts_with("t,re_0,im_0\n"));
}

#[test]
fn numap_unstable_example5_has_no_stable_cells() {
    let (_d, r) = run(&["numap"], r#"{"system":{"preset":"example5-unstable"}}"#);
    assert_eq!(r.code(), 0);
    let labels = numap_labels(&r);
    assert!(!labels.is_empty() && !labels.contains(&0));
}

#[test]
fn numap_example2_labels() {
    let (_d, r) = run(&["numap"], r#"{"system":{"preset":"example2"}}"#);
    assert_eq!(r.code(), 0);
    assert_eq!(numap_labels(&r), vec![0, 1, 2, 3]);
    let (_d, r) = run(&["numap"], r#"{"system":{"preset":"example2"},"window":[-1,1,-1,1],"nx":41,"ny":41}"#);
    assert_eq!(numap_labels(&r), vec![0, 1, 2]);
}

#[test]
fn full_oracle_gives_identical_labels() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"system":{"preset":"gamma","a":1,"n":3,"T":0.5}}"#;
    let plain = run_in(dir.path(), "plain", &["numap"], cfg);
    let full = run_in(dir.path(), "full", &["numap", "--full-oracle"], cfg);
    assert_eq!(plain.code(), 0);
    assert_eq!(full.code(), 0);
    assert_eq!(plain.read("numap.csv"), full.read("numap.csv"));
    assert_eq!(full.json("summary.json")["oracle_mismatches"], 0);
    assert!(full.json("manifest.json")["wall_time_s"].as_f64().unwrap() > 0.0);
}

#[test]
fn critical_values() {
    let (_d, r) = run(&["critical"], r#"{"kind":"mas","a":1,"b":1,"k1":1,"k2":1.1}"#);
    assert_eq!(r.code(), 0);
    let v = r.json("critical.json");
    assert_eq!(v["Tc1"].as_f64().unwrap(), 0.1);
    assert!((v["Tc2"].as_f64().unwrap() - 1.1 / 2.1).abs() < 1e-12);

    let (_d, r) = run(&["critical"], r#"{"kind":"chain","n":1,"alpha":1}"#);
    assert_eq!(r.json("critical.json")["Tc"], "inf");

    let (_d, r) = run(&["critical"], r#"{"kind":"carfollowing","n":2,"N":5,"alpha":1}"#);
    let tc = r.json("critical.json")["Tc"].as_f64().unwrap();
    let (oracle, _) = crossing_parameter(
        |t| systems::carfollowing(DelayKernel::gamma(2, t)),
        ring_eigenvalue(5, 1.0, 1),
        0.1,
        10.0,
    )
    .unwrap();
    assert!((tc - oracle).abs() < 1e-9 * oracle);
    assert_eq!(tc, carfollowing_tc(2, 5, 1.0));
}

#[test]
fn manifest_hashes_outputs() {
    let (_d, r) = run(&["critical"], r#"{"kind":"chain","n":2,"alpha":1}"#);
    let m = r.json("manifest.json");
    assert_eq!(m["command"], "critical");
    assert_eq!(m["config"]["kind"], "chain");
    assert_eq!(m["version"], env!("CARGO_PKG_VERSION"));
    let files = m["files"].as_array().unwrap();
    assert_eq!(files.len(), 1);
    assert_eq!(files[0]["name"], "critical.json");
    assert_eq!(files[0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"system":{"kind":"kuramoto","n":40,"K":4,"C":-16,"S":2,"d":0,"delays":{"kind":"exponential","mean":0.5},"switch_on":2,"seed":9,"snapshot_every":20},"sim":{"dt":0.01,"horizon":4}}"#;
    let a = run_in(dir.path(), "a", &["simulate"], cfg);
    let b = run_in(dir.path(), "b", &["simulate", "--jobs", "1"], cfg);
    assert_eq!(a.code(), 0);
    for f in ["order_parameter.csv", "phases.csv", "rate.json"] {
        assert_eq!(a.read(f), b.read(f), "{f}");
    }
    assert_eq!(a.json("manifest.json")["files"], b.json("manifest.json")["files"]);
}

#[test]
fn reproduce_fig12_tracks_consensus_curve() {
    let (_d, r) = run(&["reproduce", "fig12-heat"], "{}");
    assert_eq!(r.code(), 0, "{}", String::from_utf8_lossy(&r.output.stderr));
    let rows = r.csv("heat.csv");
    assert_eq!(rows.len(), 21 * 21);
    let h = 2.0 / 21.0;
    for row in rows {
        let (t, rate, tc) = (row[1], row[2], row[4]);
        if (rate < 0.0) != (t < tc) {
            assert!((t - tc).abs() <= h, "alpha={} T={t} rate={rate} Tc={tc}", row[0]);
        }
    }
}

#[test]
fn reproduce_fig16_desynchronizes() {
    let (_d, r) = run(&["reproduce", "fig16-series"], "{}");
    assert_eq!(r.code(), 0);
    let series = r.csv("fig16a_r.csv");
    assert!(series.iter().any(|row| row[0] < 10.0 && row[1] > 0.5));
    assert!(series.iter().any(|row| row[0] > 10.0 && row[1] < 0.1));
    assert!(r.read("fig16b_phases.csv").starts_with("t,theta_0,"));
}

#[test]
fn reproduce_rejects_unknown_figure() {
    let (_d, r) = run(&["reproduce", "fig99"], "{}");
    assert_eq!(r.code(), 2);
}
