//! CLI acceptance: deterministic reruns from manifests (criterion 12) plus
//! exit-code and format contracts.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ips-lab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn ips-lab")
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn fig2_instance(dir: &Path) -> PathBuf {
    let path = dir.join("fig2.json");
    fs::write(
        &path,
        r#"{"groups": {"g": {"prior": 1.0, "atoms": [[0.3, 0.5], [0.9, 0.5]]}}}"#,
    )
    .unwrap();
    path
}

fn pair_instance(dir: &Path) -> PathBuf {
    let path = dir.join("pair.json");
    let out = run(&[
        "generate",
        "--kind",
        "adversarial",
        "--gamma",
        "0.5",
        "--eps-prime",
        "0.25",
        "--bins",
        "8",
        "--out",
        path_str(&path),
    ]);
    assert_ok(&out);
    path
}

/// Criterion 12: rerunning every experiment from its manifest reproduces
/// CSV/JSON outputs byte-for-byte.
#[test]
fn criterion_12_manifest_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let dir = dir.path();
    let instance = pair_instance(dir);

    // One representative run per output-producing command family.
    let frontier = dir.join("frontier.csv");
    assert_ok(&run(&[
        "ips",
        path_str(&instance),
        "--group",
        "a1",
        "--out",
        path_str(&frontier),
    ]));

    let optima = dir.join("optima.csv");
    assert_ok(&run(&[
        "solve",
        path_str(&instance),
        "--metric",
        "accuracy",
        "--fairness",
        "dp",
        "--c",
        "5",
        "--h",
        "1/64",
        "--out",
        path_str(&optima),
    ]));

    let report = dir.join("report.json");
    assert_ok(&run(&[
        "detect",
        path_str(&instance),
        "--metric",
        "precision",
        "--fairness",
        "eo",
        "--c",
        "2",
        "--h",
        "1/64",
        "--out",
        path_str(&report),
    ]));

    let battery = dir.join("battery.json");
    assert_ok(&run(&["experiment", "make-battery", "--out", path_str(&battery)]));

    let t6 = dir.join("t6.csv");
    assert_ok(&run(&[
        "experiment",
        "theorem6",
        "--battery",
        path_str(&battery),
        "--h",
        "1/64",
        "--cs",
        "2",
        "--metrics",
        "accuracy",
        "--out",
        path_str(&t6),
    ]));

    let t8_config = dir.join("t8.json");
    fs::write(
        &t8_config,
        r#"{"gammas": [0.25], "eps_primes": [0.05], "cs": [2], "caps_grid": 8, "h": "1/64"}"#,
    )
    .unwrap();
    let finding = dir.join("finding.json");
    assert_ok(&run(&[
        "experiment",
        "theorem8",
        "--config",
        path_str(&t8_config),
        "--out",
        path_str(&finding),
    ]));

    let curve = dir.join("curve.csv");
    assert_ok(&run(&[
        "sweep",
        path_str(&instance),
        "--metric",
        "accuracy",
        "--fairness",
        "dp",
        "--c",
        "0:4:2",
        "--h",
        "1/64",
        "--out",
        path_str(&curve),
    ]));

    let weller = dir.join("weller.csv");
    assert_ok(&run(&[
        "weller",
        "--omega",
        "0.25,0.25,0.5",
        "--grid",
        "60",
        "--out",
        path_str(&weller),
    ]));

    for produced in [
        &instance, &frontier, &optima, &report, &t6, &finding, &curve, &weller, &battery,
    ] {
        let manifest = produced.with_file_name(format!(
            "{}.manifest.json",
            produced.file_name().unwrap().to_string_lossy()
        ));
        assert!(manifest.exists(), "missing manifest for {produced:?}");
        let rerun_dir = dir.join(format!(
            "rerun_{}",
            produced.file_stem().unwrap().to_string_lossy()
        ));
        assert_ok(&run(&[
            "rerun",
            path_str(&manifest),
            "--out-dir",
            path_str(&rerun_dir),
        ]));
        let copy = rerun_dir.join(produced.file_name().unwrap());
        let original = fs::read(produced).unwrap();
        let rerun = fs::read(&copy).unwrap();
        assert_eq!(
            original,
            rerun,
            "{} differs after rerun",
            produced.display()
        );
    }
    println!("criterion 12 (manifest reruns byte-identical): pass");
}

#[test]
fn validate_prints_base_rates_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let instance = fig2_instance(dir.path());
    let out = run(&["validate", path_str(&instance)]);
    assert_ok(&out);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("p0=0.4"), "{text}");
    assert!(text.contains("p1=0.6"), "{text}");
}

#[test]
fn validate_rejects_bad_instance_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(
        &path,
        r#"{"groups": {"g": {"prior": 1.0, "atoms": [[1.4, 0.5]]}}}"#,
    )
    .unwrap();
    let out = run(&["validate", path_str(&path)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_flag_exits_2() {
    let out = run(&["validate", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_file_exits_2() {
    let out = run(&["validate", "/nonexistent/path.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn frontier_csv_has_expected_vertices() {
    let dir = tempfile::tempdir().unwrap();
    let instance = fig2_instance(dir.path());
    let out_path = dir.path().join("frontier.csv");
    assert_ok(&run(&[
        "ips",
        path_str(&instance),
        "--group",
        "g",
        "--out",
        path_str(&out_path),
    ]));
    let text = fs::read_to_string(&out_path).unwrap();
    let upper: Vec<&str> = text.lines().filter(|l| l.starts_with("upper,")).collect();
    assert_eq!(upper.len(), 3);
    assert!(text.starts_with("frontier,tnr,tpr\n"));
    assert!(upper[1].contains("3.5000000000000003e-1"));

    let missing = run(&[
        "ips",
        path_str(&instance),
        "--group",
        "nope",
        "--out",
        path_str(&out_path),
    ]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn solve_with_zero_penalty_reports_frontier_optima() {
    let dir = tempfile::tempdir().unwrap();
    let instance = pair_instance(dir.path());
    let out_path = dir.path().join("optima.csv");
    assert_ok(&run(&[
        "solve",
        path_str(&instance),
        "--metric",
        "accuracy",
        "--fairness",
        "dp",
        "--c",
        "0",
        "--h",
        "1/64",
        "--out",
        path_str(&out_path),
    ]));
    let text = fs::read_to_string(&out_path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "tnr0,tpr0,tnr1,tpr1,objective,fairness,frontier_dist0,frontier_dist1"
    );
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.len(), 8);
        let d0: f64 = cols[6].parse().unwrap();
        let d1: f64 = cols[7].parse().unwrap();
        assert!(d0 <= 1e-9 && d1 <= 1e-9, "unconstrained optimum off frontier");
    }
}

#[test]
fn weller_svg_requires_three_labels() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("part.svg");
    let out = run(&[
        "weller",
        "--omega",
        "0.5,0.5",
        "--grid",
        "10",
        "--svg",
        path_str(&svg),
    ]);
    assert_eq!(out.status.code(), Some(2));

    assert_ok(&run(&[
        "weller",
        "--omega",
        "0.25,0.25,0.5",
        "--grid",
        "10",
        "--svg",
        path_str(&svg),
    ]));
    let text = fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg"));
    assert!(text.contains("circle"));
}

#[test]
fn threads_env_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let instance = fig2_instance(dir.path());
    let out = bin()
        .env("IPS_LAB_THREADS", "1")
        .args(["validate", path_str(&instance)])
        .output()
        .unwrap();
    assert!(out.status.success());
}
