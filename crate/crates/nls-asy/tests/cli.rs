//! End-to-end runs of the `nls-asy` binary.

use nls_asymptotics::standard_form::{general_from_structure, StandardParams, StructureMatrix, StructureVector};
use std::fs;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nls-asy")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_str(&stdout(o)).unwrap()
}

fn lambda_json(lambda: [f64; 12]) -> String {
    serde_json::json!({ "lambda": lambda }).to_string()
}

fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect()
}

#[test]
fn standardize_case7_reference_system() {
    let mut lambda = [0.0; 12];
    lambda[4] = 1.0;
    lambda[8] = 1.0;
    let o = run(&["standardize", "--params", &lambda_json(lambda)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&o);
    let expected_p = [0.0, 0.75, 0.25, 0.0, 0.0];
    let expected_q = [-2.0, 0.0, -2.0];
    for k in 0..5 {
        assert!((v["p"][k].as_f64().unwrap() - expected_p[k]).abs() < 1e-12);
    }
    for k in 0..3 {
        assert!((v["q"][k].as_f64().unwrap() - expected_q[k]).abs() < 1e-12);
    }
    assert!(v["trace"]["rotation_angle"].is_number());
}

#[test]
fn standardize_identity_and_failures() {
    let sp = StandardParams::new([1.0, 0.3, 0.2, 0.0, 0.1], [0.5, 0.0, -0.5]).unwrap();
    let o = run(&["standardize", "--params", &lambda_json(sp.to_general().lambda)]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let p: Vec<f64> = v["p"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    for (a, b) in p.iter().zip(sp.p()) {
        assert!((a - b).abs() < 1e-12);
    }

    let g = general_from_structure(&StructureMatrix { c: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]] }, &StructureVector { v: [0.0; 3] });
    assert_eq!(run(&["standardize", "--params", &lambda_json(g.lambda)]).status.code(), Some(2));

    let o = run(&["standardize", "--params", "{\"lambda\": [1, 2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("malformed"));
}

#[test]
fn solve_case1_both_modes_agree() {
    let o = run(&[
        "solve", "--params", r#"{"p": [1, 0, 0, 0, 0]}"#, "--rho", "1", "--init", "0.6,0,0.8", "--span", "-2,3", "--samples", "51",
        "--mode", "both",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("tau,D,R,I,deviation\n"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 51);
    let worst = rows.iter().map(|r| r[4]).fold(0.0, f64::max);
    assert!(worst < 1e-6, "{worst}");
    assert!(rows.iter().all(|r| (r[1] * r[1] + r[2] * r[2] + r[3] * r[3] - 1.0).abs() < 1e-9));
}

#[test]
fn solve_fixed_point_rows_are_constant() {
    let o = run(&["solve", "--params", r#"{"p": [1, 0, 0, 0, 0]}"#, "--rho", "2", "--init", "0,0,-2", "--samples", "5"]);
    assert_eq!(o.status.code(), Some(0));
    for r in csv_rows(&stdout(&o)) {
        assert_eq!(&r[1..], &[0.0, 0.0, -2.0]);
    }
}

#[test]
fn solve_unsupported_ratio_exits_3() {
    let args = ["solve", "--params", r#"{"p": [2, 0, 1, 0, 0]}"#, "--rho", "1", "--init", "1,0,0"];
    let o = run(&args);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("--mode oracle"));
    let mut oracle = args.to_vec();
    oracle.extend(["--mode", "oracle"]);
    assert_eq!(run(&oracle).status.code(), Some(0));
}

#[test]
fn solve_is_deterministic_with_seed() {
    let args = ["solve", "--params", r#"{"p": [0, 0, 1, 0, 0]}"#, "--rho", "1.5", "--seed", "42", "--mode", "both"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let other = run(&["solve", "--params", r#"{"p": [0, 0, 1, 0, 0]}"#, "--rho", "1.5", "--seed", "43", "--mode", "both"]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn fixed_points_reports() {
    let o = run(&["fixed-points", "--params", r#"{"p": [1, 0, 0, 0, 0]}"#, "--rho", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let pts = v["isolated"].as_array().unwrap();
    assert_eq!(pts.len(), 2);
    let stable: Vec<_> = pts.iter().filter(|p| p["classification"] == "asymptotically stable (sufficient)").collect();
    assert_eq!(stable.len(), 1);
    let point: Vec<f64> = stable[0]["point"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!(point[0].abs() < 1e-12 && point[1].abs() < 1e-12 && (point[2] + 1.0).abs() < 1e-12);

    let o = run(&["fixed-points", "--params", r#"{"p": [0, 1, 0, 0, 0]}"#, "--rho", "1"]);
    let v = json(&o);
    assert_eq!(v["case"], "Case 2");
    assert_eq!(v["continua"].as_array().unwrap().len(), 1);
    assert_eq!(v["isolated"].as_array().unwrap().len(), 2);

    assert_eq!(run(&["fixed-points", "--params", r#"{"p": [1, 0, 0, 0, 0]}"#, "--rho", "-1"]).status.code(), Some(1));
    assert_eq!(run(&["fixed-points", "--params", r#"{"p": [1, 0, 0, 0, 0]}"#, "--rho", "0"]).status.code(), Some(1));
}

fn write_final_data(dir: &tempfile::TempDir) -> String {
    let path = dir.path().join("final.csv");
    let mut text = String::from("xi,re_a1,im_a1,re_a2,im_a2\n");
    for k in 0..41 {
        let xi = -4.0 + 0.2 * k as f64;
        let env = 1.0 / (1.0 + 0.1 * xi * xi);
        let (s1, c1) = (0.3 * xi + 0.4f64).sin_cos();
        let (s2, c2) = (-0.7 * xi).sin_cos();
        text.push_str(&format!("{},{},{},{},{}\n", xi, 0.8 * env * c1, 0.8 * env * s1, 0.4 * env * c2, 0.4 * env * s2));
    }
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn profile_at_time_one_is_prefactored_data() {
    let dir = tempfile::tempdir().unwrap();
    let fd = write_final_data(&dir);
    let out = dir.path().join("profile.csv");
    let o = run(&[
        "profile", "--params", r#"{"p": [1, 0, 0, 0, 0]}"#, "--final-data", &fd, "--t-list", "1", "--x-grid", "-4,4,5", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("t,x,re_u1,im_u1,re_u2,im_u2\n"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 5);
    for r in rows {
        let x = r[1];
        let xi = x / 2.0;
        let env = 1.0 / (1.0 + 0.1 * xi * xi);
        // (2i)^{-1/2} = e^{-iπ/4}/√2, times e^{ix²/4}.
        let phase = -std::f64::consts::FRAC_PI_4 + x * x / 4.0;
        let a1 = 0.8 * env / 2f64.sqrt();
        let want = (a1 * (phase + 0.3 * xi + 0.4).cos(), a1 * (phase + 0.3 * xi + 0.4).sin());
        assert!((r[2] - want.0).abs() < 1e-14 && (r[3] - want.1).abs() < 1e-14, "{r:?} {want:?}");
    }
}

#[test]
fn profile_special_and_sync_check() {
    let dir = tempfile::tempdir().unwrap();
    let fd = write_final_data(&dir);
    let o = run(&[
        "profile", "--params", r#"{"p": [1, 0, 0, 0, 0], "q": [0.3, -0.2, 0.1]}"#, "--final-data", &fd, "--t-list", "2,20,200",
        "--x-grid", "-6,6,13", "--special",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = stderr(&o);
    let dev: f64 = report.split("max relative deviation ").nth(1).unwrap().split_whitespace().next().unwrap().parse().unwrap();
    assert!(dev < 1e-6, "{report}");

    let o = run(&[
        "profile", "--params", r#"{"p": [1, 0, 0, 0, 0]}"#, "--final-data", &fd, "--t-list", "1e4,1e8", "--x-grid", "0,1,2",
        "--sync-check", "--sync-region", "-1,1",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = stderr(&o);
    let sups: Vec<f64> = report.lines().filter(|l| l.starts_with("sync t")).map(|l| l.rsplit(' ').next().unwrap().parse().unwrap()).collect();
    assert_eq!(sups.len(), 2);
    assert!(sups[1] < sups[0] && sups[1] < 1e-3, "{report}");

    let o = run(&["profile", "--params", r#"{"p": [0, 1, 0, 0, 0]}"#, "--final-data", &fd, "--t-list", "2", "--x-grid", "0,1,2", "--special"]);
    assert_eq!(o.status.code(), Some(1));
}
