use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use qstrange::lattice::ImageSet;
use qstrange_cli::{RunManifest, FAILED_MARKER, MANIFEST_FILE};
use serde_json::Value;

fn qstrange(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qstrange"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_ok(args: &[&str]) -> RunManifest {
    let out = qstrange(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let dir = args.iter().position(|a| *a == "--out").map(|k| args[k + 1]).unwrap();
    RunManifest::read(&Path::new(dir).join(MANIFEST_FILE)).unwrap()
}

fn result(m: &RunManifest, key: &str) -> f64 {
    m.results[key].as_f64().unwrap_or_else(|| panic!("{key} missing"))
}

#[test]
fn zero_steps_render_the_initial_image() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a");
    let m = run_ok(&["attractor", "--nq", "4", "--t", "0", "--out", out.to_str().unwrap()]);
    let image = ImageSet::default_disk(4).unwrap();
    assert_eq!(result(&m, "classical_occupied_cells") as usize, image.len());
    let csv = fs::read_to_string(out.join("classical_density.csv")).unwrap();
    let mut occupied = Vec::new();
    for line in csv.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        if f[2].parse::<f64>().unwrap() > 0.0 {
            occupied.push((f[0].parse::<u32>().unwrap(), f[1].parse::<u32>().unwrap()));
        }
    }
    let mut want: Vec<(u32, u32)> = image.points().iter().map(|p| (p.i, p.j)).collect();
    want.sort_by_key(|&(i, j)| (j, i));
    assert_eq!(occupied, want);
    let ppm = fs::read(out.join("classical_central.ppm")).unwrap();
    assert!(ppm.starts_with(b"P6\n256 256\n255\n"));
}

#[test]
fn noisy_attractor_records_fidelity() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("q");
    let m = run_ok(&[
        "attractor", "--nq", "4", "--t", "10", "--quantum", "--epsilon", "0.05", "--seed", "3", "--out",
        out.to_str().unwrap(),
    ]);
    let f = result(&m, "fidelity");
    assert!(f > 0.0 && f < 0.99, "f = {f}");
    assert!(result(&m, "quantum_occupied_cells") > result(&m, "classical_occupied_cells"));
    assert!(out.join("quantum_phase_space.ppm").exists());
}

#[test]
fn default_noisy_attractor_is_refused_with_advice() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("big");
    let res = qstrange(&["attractor", "--quantum", "--epsilon", "0.05", "--out", out.to_str().unwrap()]);
    assert!(!res.status.success());
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("28-qubit") && err.contains("--nq"), "{err}");
    assert!(out.join(FAILED_MARKER).exists());
    let m = RunManifest::read(&out.join(MANIFEST_FILE)).unwrap();
    assert_eq!(m.status, "failed");
}

#[test]
fn validation_errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 3] = [
        &["spectral", "--nq", "3", "--nf", "4"],
        &["attractor", "--nq", "3", "--epsilon", "0.1"],
        &["spectral", "--nq", "3", "--nf", "2", "--backend", "sparse"],
    ];
    for (k, args) in cases.iter().enumerate() {
        let out = dir.path().join(k.to_string());
        let mut full: Vec<&str> = args.to_vec();
        full.extend(["--out", out.to_str().unwrap()]);
        let res = qstrange(&full);
        assert!(!res.status.success(), "{args:?} should fail");
        assert!(out.join(FAILED_MARKER).exists());
    }
}

#[test]
fn noise_lowers_spectral_agreement() {
    let dir = tempfile::tempdir().unwrap();
    let clean = dir.path().join("clean");
    let noisy = dir.path().join("noisy");
    let base = ["spectral", "--nq", "4", "--t", "6", "--nf", "3"];
    let mut a = base.to_vec();
    a.extend(["--out", clean.to_str().unwrap()]);
    let mut b = base.to_vec();
    b.extend(["--epsilon", "0.025", "--out", noisy.to_str().unwrap()]);
    let m0 = run_ok(&a);
    let m1 = run_ok(&b);
    assert!(result(&m0, "max_relative_error") < 1e-8);
    assert!((result(&m0, "coarse_correlation") - 1.0).abs() < 1e-12);
    assert!(result(&m1, "coarse_correlation") < result(&m0, "coarse_correlation"));
    assert!(result(&m1, "fidelity") < 1.0);
}

#[test]
fn scan_rows_without_noise_are_exact() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("scan");
    let m = run_ok(&[
        "fidelity-scan", "--nq", "3", "--t", "4", "--epsilon", "0,0.01", "--seeds", "2", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(m.results["rows"], Value::from(4));
    let csv = fs::read_to_string(out.join("scan.csv")).unwrap();
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    for r in rows.iter().filter(|r| r[0] == 0.0) {
        assert_eq!((r[4], r[5]), (1.0, 0.0));
    }
    assert!(rows.iter().any(|r| r[0] > 0.0 && r[4] < 1.0 && r[5] > 0.0));
    assert!(out.join("fit_summary.json").exists());
}

#[test]
fn complexity_writes_reference_line() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c");
    run_ok(&["complexity", "--nq", "3", "--t", "4", "--nf", "2", "--trials", "3", "--out", out.to_str().unwrap()]);
    let csv = fs::read_to_string(out.join("complexity.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "n_q,mode,M,mean_fidelity,status,reference");
    assert_eq!(lines.len(), 3);
    for l in &lines[1..] {
        let f: Vec<&str> = l.split(',').collect();
        assert_eq!(f[4], "ok");
        assert!((f[5].parse::<f64>().unwrap() - 0.36 * 64.0).abs() < 1e-9);
    }
}

#[test]
fn pebble_reports_executions() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p1");
    let m = run_ok(&["pebble", "--nq", "2", "--nt", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(m.results["segment_executions"], Value::from(3));
    assert_eq!(m.results["mismatches"], Value::from(0));
    let out = dir.path().join("p4");
    let m = run_ok(&["pebble", "--nq", "3", "--nt", "4", "--out", out.to_str().unwrap()]);
    assert_eq!(m.results["segment_executions"], Value::from(81));
    assert_eq!(m.results["verified_points"], Value::from(128));
    let plan = fs::read_to_string(out.join("plan.txt")).unwrap();
    assert_eq!(plan.lines().count(), 1 + 243);
}

#[test]
fn custom_image_is_recorded_and_replayed() {
    let dir = tempfile::tempdir().unwrap();
    let pbm = dir.path().join("cell.pbm");
    let mut buf = Vec::new();
    ImageSet::central_cell(3).unwrap().write_pbm(&mut buf).unwrap();
    fs::write(&pbm, buf).unwrap();
    let out = dir.path().join("img");
    let m = run_ok(&[
        "attractor", "--nq", "3", "--t", "3", "--image", pbm.to_str().unwrap(), "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(m.inputs.len(), 1);
    assert_eq!(result(&m, "initial_points"), 64.0);

    let again = dir.path().join("again");
    let manifest = out.join(MANIFEST_FILE);
    let res = qstrange(&["replay", manifest.to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));

    // A changed input is caught before anything runs.
    fs::write(&pbm, "P1\n8 8\n".to_string() + &"1".repeat(64)).unwrap();
    let res = qstrange(&["replay", manifest.to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("changed"));
}

#[test]
fn replay_detects_a_tampered_digest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s");
    run_ok(&["spectral", "--nq", "3", "--t", "2", "--nf", "2", "--out", out.to_str().unwrap()]);
    let path = out.join(MANIFEST_FILE);
    let mut m = RunManifest::read(&path).unwrap();
    m.artifacts[0].sha256 = "0".repeat(64);
    m.write(&out).unwrap();
    let again = dir.path().join("again");
    let res = qstrange(&["replay", path.to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains(&m.artifacts[0].path));
}
