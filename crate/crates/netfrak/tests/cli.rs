//! End-to-end tests of the netfrak binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use netfrak::fixtures::{grid_network, star3};
use netfrak::io::{write_network_csv, write_pattern_csv, RunManifest};
use netfrak::simulate::{poisson_homogeneous, replicate_rng};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_netfrak"))
}

fn write_inputs(dir: &Path) -> (PathBuf, PathBuf) {
    let net_csv = dir.join("net.csv");
    let pat_csv = dir.join("pat.csv");
    let net = grid_network(3, 3, 1.0);
    write_network_csv(&net_csv, &net).unwrap();
    let mut rng = replicate_rng(1, 0);
    let pattern = poisson_homogeneous(&net, 2.0, &mut rng);
    write_pattern_csv(&pat_csv, &net, &pattern).unwrap();
    (net_csv, pat_csv)
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn validate_reports_counts() {
    let dir = tempfile::tempdir().unwrap();
    let net_csv = dir.path().join("net.csv");
    write_network_csv(&net_csv, &star3()).unwrap();
    let out = bin().args(["validate", "--net"]).arg(&net_csv).output().unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("3 segments and 4 nodes"), "{text}");
    assert!(text.contains("total length 3"), "{text}");
    assert!(text.contains("boundary nodes 3"), "{text}");
}

#[test]
fn distance_prints_geodesic_value() {
    let dir = tempfile::tempdir().unwrap();
    let net_csv = dir.path().join("net.csv");
    write_network_csv(&net_csv, &star3()).unwrap();
    let out = bin()
        .args(["distance", "--net"])
        .arg(&net_csv)
        .args(["--from", "0.5,0", "--to", "-0.5,0", "--tol", "0.01"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let d: f64 = stdout(&out).trim().parse().unwrap();
    assert!((d - 1.0).abs() < 1e-12);
}

#[test]
fn simulate_writes_replicates_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let (net_csv, _) = write_inputs(dir.path());
    let out_dir = dir.path().join("sims");
    let out = bin()
        .args(["simulate", "--net"])
        .arg(&net_csv)
        .args(["--model", "poisson", "--params", "rho=2.0"])
        .args(["--seed", "9", "--reps", "3", "--out-dir"])
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    for rep in 0..3 {
        let p = out_dir.join(format!("pattern_{rep:03}.csv"));
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("x,y\n"));
    }
    let manifest = RunManifest::read(&out_dir.join("manifest.json")).unwrap();
    assert_eq!(manifest.subcommand, "simulate");
    assert_eq!(manifest.seed, Some(9));
    assert_eq!(manifest.params["model"], "poisson");
    assert_eq!(manifest.inputs.len(), 1);

    // Same seed, fresh run: byte-identical replicates.
    let out_dir2 = dir.path().join("sims2");
    let out = bin()
        .args(["simulate", "--net"])
        .arg(&net_csv)
        .args(["--model", "poisson", "--params", "rho=2.0"])
        .args(["--seed", "9", "--reps", "3", "--out-dir"])
        .arg(&out_dir2)
        .output()
        .unwrap();
    assert!(out.status.success());
    for rep in 0..3 {
        let name = format!("pattern_{rep:03}.csv");
        assert_eq!(
            std::fs::read(out_dir.join(&name)).unwrap(),
            std::fs::read(out_dir2.join(&name)).unwrap()
        );
    }
}

#[test]
fn summary_writes_csv_svg_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let (net_csv, pat_csv) = write_inputs(dir.path());
    let out_csv = dir.path().join("k.csv");
    let out_svg = dir.path().join("k.svg");
    let out = bin()
        .args(["summary", "--net"])
        .arg(&net_csv)
        .arg("--pattern")
        .arg(&pat_csv)
        .args(["--stat", "k", "--mode", "hom", "--nr", "65", "--out"])
        .arg(&out_csv)
        .arg("--svg")
        .arg(&out_svg)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = std::fs::read_to_string(&out_csv).unwrap();
    assert!(text.starts_with("r,value,defined,n_grid,n_points\n"));
    assert_eq!(text.lines().count(), 66);
    let svg = std::fs::read_to_string(&out_svg).unwrap();
    assert!(svg.contains("class=\"observed\""));
    assert!(svg.contains("stroke-dasharray")); // K reference diagonal
    let manifest = RunManifest::read(&dir.path().join("k.csv.manifest.json")).unwrap();
    assert_eq!(manifest.subcommand, "summary");
    assert_eq!(manifest.params["stat"], "K");
    assert_eq!(manifest.inputs.len(), 2);
}

#[test]
fn g_is_accepted_as_alias_for_h() {
    let dir = tempfile::tempdir().unwrap();
    let (net_csv, pat_csv) = write_inputs(dir.path());
    let out_csv = dir.path().join("g.csv");
    let out = bin()
        .args(["summary", "--net"])
        .arg(&net_csv)
        .arg("--pattern")
        .arg(&pat_csv)
        .args(["--stat", "g", "--nr", "33", "--out"])
        .arg(&out_csv)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = RunManifest::read(&dir.path().join("g.csv.manifest.json")).unwrap();
    assert_eq!(manifest.params["stat"], "H");
}

#[test]
fn intensity_writes_grid_rows() {
    let dir = tempfile::tempdir().unwrap();
    let (net_csv, pat_csv) = write_inputs(dir.path());
    let out_csv = dir.path().join("rho.csv");
    let out = bin()
        .args(["intensity", "--net"])
        .arg(&net_csv)
        .arg("--pattern")
        .arg(&pat_csv)
        .args(["--grid-spacing", "0.5", "--out"])
        .arg(&out_csv)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = std::fs::read_to_string(&out_csv).unwrap();
    assert!(text.starts_with("x,y,segment,offset,rho_hat\n"));
    assert!(text.lines().count() > 12);
}

#[test]
fn envelope_writes_csv_and_prints_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let (net_csv, pat_csv) = write_inputs(dir.path());
    let out_csv = dir.path().join("env.csv");
    let out = bin()
        .args(["envelope", "--net"])
        .arg(&net_csv)
        .arg("--pattern")
        .arg(&pat_csv)
        .args(["--stat", "j", "--nsim", "19", "--nr", "33", "--seed", "3", "--out"])
        .arg(&out_csv)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = std::fs::read_to_string(&out_csv).unwrap();
    assert!(text.starts_with("r,obs,lo,hi,mean,defined_count\n"));
    assert!(stdout(&out).contains("r values compared"));
}

#[test]
fn missing_flag_is_a_user_error() {
    let out = bin().arg("validate").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("--net"), "{err}");
}

#[test]
fn missing_file_is_a_user_error() {
    let out = bin()
        .args(["validate", "--net", "/nonexistent/net.csv"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(!String::from_utf8_lossy(&out.stderr).trim().is_empty());
}

#[test]
fn unknown_model_is_a_user_error() {
    let dir = tempfile::tempdir().unwrap();
    let (net_csv, _) = write_inputs(dir.path());
    let out = bin()
        .args(["simulate", "--net"])
        .arg(&net_csv)
        .args(["--model", "hawkes", "--out-dir"])
        .arg(dir.path().join("x"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("hawkes"));
}

#[test]
fn crossing_segments_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let net_csv = dir.path().join("bad.csv");
    std::fs::write(&net_csv, "x1,y1,x2,y2\n0,0,1,1\n0,1,1,0\n").unwrap();
    let out = bin().args(["validate", "--net"]).arg(&net_csv).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.to_lowercase().contains("cross"), "{err}");
}
