use std::path::Path;
use std::process::{Command, Output};

fn qskyrm(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qskyrm"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = qskyrm(dir, args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(dir: &Path, name: &str) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join(name)).unwrap()).unwrap()
}

fn bell(dir: &Path) {
    ok(dir, &["generate", "--l1", "1", "--l2", "0", "--alpha", "0.7071", "--gamma", "0"]);
}

#[test]
fn generate_then_metrics_against_self() {
    let d = tempfile::tempdir().unwrap();
    bell(d.path());
    ok(d.path(), &["metrics", "--rho", "rho.json", "--target", "rho.json"]);
    let m = json(d.path(), "metrics.json");
    assert!((m["fidelity"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!(d.path().join("rho.json.manifest.json").exists());
    assert_eq!(json(d.path(), "spec.json")["ell2"], 0);
}

#[test]
fn equal_modes_rejected() {
    let d = tempfile::tempdir().unwrap();
    let out = qskyrm(d.path(), &["generate", "--l1", "1", "--l2", "1", "--alpha", "0.8"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("must differ"));
    assert!(!d.path().join("spec.json").exists());
}

#[test]
fn malformed_inputs_exit_2() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("bad.json"), "{\"rho\": 3}").unwrap();
    let out = qskyrm(d.path(), &["simulate-qst", "--rho", "bad.json"]);
    assert_eq!(out.status.code(), Some(2));
    let out = qskyrm(d.path(), &["simulate-qst", "--rho", "missing.json"]);
    assert_eq!(out.status.code(), Some(2));
    let out = qskyrm(d.path(), &["--threads", "0", "metrics", "--rho", "a", "--target", "b"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exact_probabilities_and_determinism() {
    let d = tempfile::tempdir().unwrap();
    bell(d.path());
    ok(d.path(), &["simulate-qst", "--rho", "rho.json", "--shots", "0", "--out", "exact.csv"]);
    let exact = std::fs::read_to_string(d.path().join("exact.csv")).unwrap();
    assert_eq!(exact.lines().count(), 37);
    assert!(exact.lines().nth(1).unwrap().ends_with(','), "exact rows carry no counts");

    ok(d.path(), &["simulate-qst", "--rho", "rho.json", "--shots", "500", "--seed", "9", "--out", "a.csv"]);
    ok(d.path(), &["simulate-qst", "--rho", "rho.json", "--shots", "500", "--seed", "9", "--out", "b.csv"]);
    let read = |n: &str| std::fs::read(d.path().join(n)).unwrap();
    assert_eq!(read("a.csv"), read("b.csv"));
    ok(d.path(), &["simulate-qst", "--rho", "rho.json", "--shots", "500", "--seed", "10", "--out", "c.csv"]);
    assert_ne!(read("a.csv"), read("c.csv"));
}

#[test]
fn noisy_reconstruction_median_fidelity() {
    let d = tempfile::tempdir().unwrap();
    bell(d.path());
    let mut fs: Vec<f64> = (0..50)
        .map(|seed| {
            let s = seed.to_string();
            ok(d.path(), &["simulate-qst", "--rho", "rho.json", "--shots", "10000", "--seed", &s]);
            ok(d.path(), &["reconstruct", "--counts", "counts.csv", "--target", "rho.json"]);
            json(d.path(), "rho_reconstructed.json.metrics.json")["fidelity"].as_f64().unwrap()
        })
        .collect();
    fs.sort_by(f64::total_cmp);
    assert!((fs[24] + fs[25]) / 2.0 >= 0.98, "{fs:?}");
}

#[test]
fn raw_reconstruction_may_be_nonphysical() {
    let d = tempfile::tempdir().unwrap();
    bell(d.path());
    let mut codes = Vec::new();
    for seed in 0..20 {
        let s = seed.to_string();
        ok(d.path(), &["simulate-qst", "--rho", "rho.json", "--shots", "50", "--seed", &s]);
        codes.push(qskyrm(d.path(), &["reconstruct", "--counts", "counts.csv", "--no-project"]).status.code());
        // the projected default is always physical
        ok(d.path(), &["reconstruct", "--counts", "counts.csv"]);
    }
    assert!(codes.iter().all(|c| *c == Some(0) || *c == Some(3)));
    assert!(codes.contains(&Some(3)));
}

#[test]
fn stokes_skyrme_project() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    bell(p);
    ok(p, &["stokes", "--rho", "rho.json", "--spec", "spec.json", "--grid-n", "257", "--half-width", "8"]);
    ok(p, &["skyrme", "--field", "stokes.csv"]);
    let r = json(p, "topology.json");
    assert!((r["n_numeric"].as_f64().unwrap() - 1.0).abs() <= 0.01, "{r}");
    assert_eq!(r["n_theory"], 1);
    assert!(r["coverage_total"].as_f64().unwrap() >= 0.97);

    ok(p, &["project", "--field", "stokes.csv"]);
    let text = std::fs::read_to_string(p.join("projection.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), "x,y,z,s1,s2,s3,s0");
    let origin = text.lines().nth(1 + 128 * 257 + 128).unwrap();
    let cols: Vec<f64> = origin.split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(&cols[..3], &[0.0, 0.0, -1.0]);
}

#[test]
fn coarse_field_warns() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    bell(p);
    ok(p, &["stokes", "--rho", "rho.json", "--spec", "spec.json", "--grid-n", "33", "--out", "coarse.csv"]);
    let out = qskyrm(p, &["skyrme", "--field", "coarse.csv"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn sweep_rows_satisfy_fidelity_concurrence_link() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    ok(p, &["generate", "--l1", "1", "--l2", "0"]);
    let env_threads = Command::new(env!("CARGO_BIN_EXE_qskyrm"))
        .current_dir(p)
        .env("QSKYRM_THREADS", "2")
        .args(["sweep-decay", "--spec", "spec.json", "--alphas", "0.75,0.9,1", "--grid-n", "129"])
        .output()
        .unwrap();
    assert!(env_threads.status.success());
    let mut r = csv::Reader::from_path(p.join("sweep.csv")).unwrap();
    assert_eq!(
        r.headers().unwrap().iter().collect::<Vec<_>>(),
        ["alpha", "fidelity", "concurrence", "n_numeric", "n_closed_form", "half_width"]
    );
    let rows: Vec<Vec<f64>> = r.records().map(|rec| rec.unwrap().iter().map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 3);
    for row in &rows {
        assert!((row[1] - (1.0 + row[2]) / 2.0).abs() < 1e-9);
    }
    assert_eq!(rows[2][3], 0.0);
}
