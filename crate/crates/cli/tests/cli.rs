// Copyright 2026 The ionpulse Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const SMALL: &[&str] = &["--n-max", "4", "--num-tslots", "10"];

fn ionpulse(library: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ionpulse"))
        .arg("--library")
        .arg(library)
        .arg("-q")
        .args(args)
        .env_remove("PULSE_LIBRARY_ROOT")
        .output()
        .expect("run ionpulse")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}\nstderr: {}", String::from_utf8_lossy(&out.stdout), stderr(out))
    })
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn synth_cr(library: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["synth", "--gate", "CR", "--theta", "0.382"];
    args.extend_from_slice(SMALL);
    args.extend_from_slice(extra);
    ionpulse(library, &args)
}

#[test]
fn synth_then_cache_hit() {
    let dir = tempfile::tempdir().unwrap();
    let first = synth_cr(dir.path(), &[]);
    assert_eq!(first.status.code(), Some(0), "{}", stderr(&first));
    let a = stdout_json(&first);
    assert_eq!(a["cache_hit"], false);
    assert_eq!(a["converged"], true);
    assert!(a["fidelity"].as_f64().unwrap() > 0.999);
    assert!(Path::new(a["path"].as_str().unwrap()).exists());

    let second = synth_cr(dir.path(), &["--strategy", "lookup"]);
    assert_eq!(second.status.code(), Some(0), "{}", stderr(&second));
    let b = stdout_json(&second);
    assert_eq!(b["cache_hit"], true);
    assert_eq!(b["key"], a["key"]);
    assert_eq!(b["fidelity"], a["fidelity"]);

    let list = ionpulse(dir.path(), &["cache", "list", "--json"]);
    let rows = stdout_json(&list);
    assert_eq!(rows.as_array().unwrap().len(), 1);
    assert_eq!(rows[0]["key"], a["key"]);
}

#[test]
fn seed_is_part_of_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let a = stdout_json(&synth_cr(dir.path(), &[]));
    let b = stdout_json(&synth_cr(dir.path(), &["--seed", "9"]));
    assert_ne!(a["key"], b["key"]);
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["synth", "--gate", "CD", "--alpha", "nan+0j"][..],
        &["synth", "--gate", "CD"],
        &["synth", "--gate", "CR", "--theta", "0.3", "--n-max", "0"],
        &["synth", "--gate", "CR", "--theta", "0.3", "--eta", "-1"],
        &["sweep", "--gate", "CR", "--theta", "0.3", "--durations", "100,0"],
        &["noise", "--gate", "CR", "--theta", "0.3", "--gamma", "-2"],
    ] {
        let out = ionpulse(dir.path(), args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
        assert!(stderr(&out).starts_with("error: "), "{args:?}");
    }
    assert!(std::fs::read_dir(dir.path()).unwrap().next().is_none(), "usage errors wrote to the library");
}

#[test]
fn lookup_miss_is_a_failure() {
    let dir = tempfile::tempdir().unwrap();
    let out = synth_cr(dir.path(), &["--strategy", "lookup"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("no cached pulse"));
}

#[test]
fn unreachable_target_exits_3_with_best_pulse() {
    // θ = 1 needs a constant drive of about 1.9 × the amplitude bound in 300 µs.
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["synth", "--gate", "CR", "--theta", "1.0"];
    args.extend_from_slice(SMALL);
    let out = ionpulse(dir.path(), &args);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    let v = stdout_json(&out);
    assert_eq!(v["converged"], false);
    assert!(v["fidelity"].as_f64().unwrap() < 0.98);
    assert!(stderr(&out).contains("not converged"));
}

#[test]
fn sweep_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep/out.csv");
    let mut args = vec!["sweep", "--gate", "CR", "--theta", "0.2", "--durations", "200,300", "--out"];
    let csv_arg = csv.to_str().unwrap().to_owned();
    args.push(&csv_arg);
    args.extend_from_slice(SMALL);
    let out = ionpulse(&dir.path().join("lib"), &args);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "duration_us,infidelity,key");
    assert_eq!(lines.len(), 3);
    for (line, d) in lines[1..].iter().zip(["200", "300"]) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[0], d);
        let infid: f64 = cols[1].parse().unwrap();
        assert!((0.0..1e-3).contains(&infid), "{line}");
        assert_eq!(cols[2].len(), 64);
    }
}

#[test]
fn noise_single_trajectory_and_angular_override() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["noise", "--gate", "CR", "--theta", "0.382", "--traj", "1", "--gamma", "18", "--per-traj"];
    args.extend_from_slice(&["--delta", "2pi*10k"]);
    args.extend_from_slice(SMALL);
    let out = ionpulse(dir.path(), &args);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = stdout_json(&out);
    assert!(v["std"].is_null());
    assert_eq!(v["trajectories"], 1);
    assert_eq!(v["per_trajectory"].as_array().unwrap().len(), 1);
    let mean = v["mean"].as_f64().unwrap();
    assert!(mean > 0.0 && mean <= v["closed_fidelity"].as_f64().unwrap() + 1e-12);

    // "2pi*10k" is the bundled device's detuning, so the key matches a default run.
    let plain = stdout_json(&synth_cr(dir.path(), &[]));
    assert_eq!(plain["cache_hit"], true);
    assert_eq!(plain["key"], v["key"]);
}

#[test]
fn noise_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["noise", "--gate", "CR", "--theta", "0.382", "--traj", "6", "--gamma", "40", "--seed", "3"];
    args.extend_from_slice(SMALL);
    let a = ionpulse(dir.path(), &args);
    let b = ionpulse(dir.path(), &args);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
}

fn write_circuit(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("circuit.json");
    std::fs::write(&path, body).unwrap();
    path
}

const SMALL_CAT: &str = r#"{
  "format": "ionpulse-circuit", "version": 1, "name": "small_cat",
  "gates": [
    {"gate": "CS", "params": {"zeta": "0.5"}, "model": {"n_max": 4, "num_tslots": 20}},
    {"ideal": "H", "qubit": 0},
    {"gate": "CD", "params": {"alpha": [0.5, 0.0]}, "model": {"n_max": 4, "num_tslots": 10}}
  ]
}"#;

#[test]
fn export_writes_requested_backends() {
    let dir = tempfile::tempdir().unwrap();
    let circuit = write_circuit(dir.path(), SMALL_CAT);
    let lib = dir.path().join("lib");
    let out_dir = dir.path().join("all");
    let out = ionpulse(&lib, &["export", circuit.to_str().unwrap(), "--out-dir", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = stdout_json(&out);
    let files = v["files"].as_array().unwrap();
    assert_eq!(files.len(), 2);
    assert_eq!(v["optimizer_calls"], 2);
    for f in files {
        assert!(Path::new(f.as_str().unwrap()).is_file());
    }

    // Second export reuses the library.
    let jaqal_dir = dir.path().join("jaqal");
    let out = ionpulse(
        &lib,
        &["export", circuit.to_str().unwrap(), "--backend", "jaqal", "--out-dir", jaqal_dir.to_str().unwrap()],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = stdout_json(&out);
    assert_eq!(v["files"].as_array().unwrap().len(), 1);
    assert_eq!(v["optimizer_calls"], 0);
    assert_eq!(
        std::fs::read(jaqal_dir.join("small_cat.jaqal")).unwrap(),
        std::fs::read(out_dir.join("small_cat.jaqal")).unwrap()
    );
}

#[test]
fn export_rejects_bad_circuits() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (r#"{"format": "ionpulse-circuit", "version": 1, "gates": []}"#, "no gates"),
        (r#"{"format": "ionpulse-circuit", "version": 2, "gates": [{"ideal": "H"}]}"#, "unsupported"),
        (r#"{"format": "ionpulse-circuit", "version": 1, "gates": [{"gate": "XX"}]}"#, "registered: CD, CR, CS"),
        (r#"{"format": "ionpulse-circuit", "version": 1, "gates": [{"ideal": "Q"}]}"#, "unknown ideal gate"),
        (r#"{"format": "ionpulse-circuit", "version": 1, "gates": [{"gate": "CR", "params": {"theta": "x"}}]}"#, ""),
        ("{not json", "malformed"),
    ];
    for (body, needle) in cases {
        let circuit = write_circuit(dir.path(), body);
        let out = ionpulse(&dir.path().join("lib"), &["export", circuit.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "{body}: {}", stderr(&out));
        assert!(stderr(&out).contains(needle), "{body}: {}", stderr(&out));
    }
    let out = ionpulse(dir.path(), &["export", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    let out = ionpulse(dir.path(), &["--device", "no_such_device.toml", "synth", "--gate", "CR", "--theta", "0.3"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn cat_writes_grids_and_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("cat");
    let out = ionpulse(
        &dir.path().join("lib"),
        &["cat", "--n-max", "8", "--grid-points", "21", "--out-dir", out_dir.to_str().unwrap()],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = stdout_json(&out);
    assert!(v["negativity"].as_f64().unwrap() < 0.0);
    assert!((v["p_up"].as_f64().unwrap() - 0.5).abs() < 0.05);
    for stage in ["after_cs", "after_cd", "cat"] {
        let csv = std::fs::read_to_string(out_dir.join(format!("wigner_{stage}.csv"))).unwrap();
        assert_eq!(csv.lines().count(), 1 + 21 * 21, "{stage}");
    }
    let saved: Value = serde_json::from_slice(&std::fs::read(out_dir.join("cat_metrics.json")).unwrap()).unwrap();
    assert_eq!(saved, v);
}

#[test]
fn cache_gc_removes_corrupt_entries() {
    let dir = tempfile::tempdir().unwrap();
    let v = stdout_json(&synth_cr(dir.path(), &[]));
    let path = v["path"].as_str().unwrap().to_owned();
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::write(&path, text.replacen("0.382", "0.383", 1)).unwrap();
    let stray = Path::new(&path).with_file_name(".tmp-leftover");
    std::fs::write(&stray, b"partial").unwrap();

    let dry = stdout_json(&ionpulse(dir.path(), &["cache", "gc", "--dry-run"]));
    assert_eq!(dry["removed"].as_array().unwrap().len(), 2);
    assert!(Path::new(&path).exists() && stray.exists());

    let gc = ionpulse(dir.path(), &["cache", "gc"]);
    assert_eq!(gc.status.code(), Some(0), "{}", stderr(&gc));
    assert!(!Path::new(&path).exists() && !stray.exists());
    let list = stdout_json(&ionpulse(dir.path(), &["cache", "list", "--json"]));
    assert!(list.as_array().unwrap().is_empty());
}
