//! Behaviour of the command-line binary.

use std::process::Command;

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_wedgecrack")).args(args).env_remove("WEDGECRACK_CACHE").output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

fn field(csv: &str, name: &str) -> f64 {
    let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = header.iter().position(|h| *h == name).unwrap();
    row[i].parse().unwrap()
}

#[test]
fn edge_constant_load_row() {
    let (code, out, _) = run(&["edge", "--alpha", "90deg", "--load", "1,1", "--no-timestamp"]);
    assert_eq!(code, 0);
    assert!((field(&out, "k_i") - (1.776778 - 0.121477)).abs() < 1e-5);
    assert!((field(&out, "k_ii") - (-0.202058 + 1.813571)).abs() < 1e-5);
    assert!((field(&out, "d22") - 1.813571).abs() < 1e-5);
}

#[test]
fn edge_eigen_load_row() {
    let (code, out, _) = run(&["edge", "--alpha", "90deg", "--eigen", "first", "--no-timestamp"]);
    assert_eq!(code, 0);
    assert!((field(&out, "mu") - 0.544484).abs() < 1e-6);
    assert!((field(&out, "k_star") - 0.5430756).abs() < 1e-6);
    assert!((field(&out, "d11") - 2.764929).abs() < 1e-5);
}

#[test]
fn edge_radians_match_degrees() {
    let (_, deg, _) = run(&["edge", "--alpha", "60deg", "--load", "1,0", "--no-timestamp"]);
    let (_, rad, _) = run(&["edge", "--alpha", "1.0471975511965976rad", "--load", "1,0", "--no-timestamp"]);
    assert!((field(&deg, "k_i") - field(&rad, "k_i")).abs() < 1e-12);
}

#[test]
fn validation_errors_exit_2() {
    for args in [
        &["edge", "--alpha", "0deg", "--load", "1,0"][..],
        &["edge", "--alpha", "180deg", "--load", "1,0"],
        &["edge", "--alpha", "90", "--load", "1,0"],
        &["edge", "--alpha", "90deg"],
        &["edge", "--alpha", "30deg", "--eigen", "second"],
        &["internal", "--alpha", "90deg", "--a", "2", "--b", "1"],
        &["halfplane", "--a", "0.5", "--poisson", "0.7"],
        &["tables", "4"],
        &["sweep", "--alpha", "10:170:0deg"],
    ] {
        let (code, out, err) = run(args);
        assert_eq!(code, 2, "{args:?}: {err}");
        assert!(out.is_empty(), "{args:?} produced output");
    }
}

#[test]
fn halfplane_edge_limit() {
    let (code, out, _) = run(&["halfplane", "--a", "0", "--b", "1", "--P", "1", "--no-timestamp"]);
    assert_eq!(code, 0);
    let want = std::f64::consts::PI.sqrt() * 1.1215222;
    assert!((field(&out, "k_i_plus") - want).abs() < 2e-6);
    assert!(field(&out, "k_i_minus").is_nan());
}

#[test]
fn internal_row_has_diagnostics() {
    let (code, out, _) = run(&["internal", "--alpha", "90deg", "--a", "0.5", "--b", "1", "--load", "1,0", "--no-timestamp"]);
    assert_eq!(code, 0);
    assert!(field(&out, "closure_defect") < 1e-8);
    assert!(field(&out, "transform_defect") < 1e-10);
    assert!(field(&out, "n_roots") > 10.0);
    assert!(field(&out, "k_i_plus") > 0.0);
}

#[test]
fn tables_report_and_timestamp() {
    let (code, out, err) = run(&["tables", "3"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("# generated_unix="));
    assert!(err.contains("18 values"));
    let body: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(body[0], "table,alpha_over_pi,alpha_rad,quantity,reference,computed,rel_error,tolerance,pass,error");
    assert_eq!(body.len(), 19);
    assert!(body[1..].iter().all(|l| l.ends_with(",1,")));
}

#[test]
fn sweep_is_deterministic_and_records_failures() {
    let args = ["sweep", "--alpha", "30:150:40deg", "--delta", "1e-4,0.5", "--no-timestamp"];
    let (c1, a, _) = run(&args);
    let (c2, b, _) = run(&args);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(a, b);
    let lines: Vec<&str> = a.lines().collect();
    assert_eq!(lines.len(), 1 + 4 * 2);
    assert!(lines[0].starts_with("alpha_rad,alpha_deg,a,b,delta,"));
    assert!(lines[0].ends_with("quad_error,error"));
    let alphas: Vec<f64> = lines[1..].iter().map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(alphas.windows(2).all(|w| w[1] >= w[0]));

    let (code, out, _) = run(&["sweep", "--alpha", "20deg,90deg", "--eigen", "second", "--no-timestamp"]);
    assert_eq!(code, 0);
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert!(rows[0].ends_with("(requires alpha above the threshold)"));
    assert!(rows[1].ends_with(','));
}

#[test]
fn json_mirrors_csv() {
    let (_, csv, _) = run(&["edge", "--alpha", "45deg", "--load", "1,0", "--no-timestamp"]);
    let (_, json, _) = run(&["edge", "--alpha", "45deg", "--load", "1,0", "--no-timestamp", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    let cols: Vec<&str> = v["columns"].as_array().unwrap().iter().map(|c| c.as_str().unwrap()).collect();
    assert_eq!(header, cols);
    let i = cols.iter().position(|c| *c == "k_i").unwrap();
    assert_eq!(v["rows"][0][i].as_f64().unwrap(), field(&csv, "k_i"));
}

#[test]
fn output_file_and_cache_dir() {
    let dir = std::env::temp_dir().join(format!("wedgecrack-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("out.csv");
    let cache = dir.join("cache");
    std::fs::create_dir_all(&cache).unwrap();
    let p = path.to_str().unwrap();
    let c = cache.to_str().unwrap();
    let (code, out, _) = run(&["edge", "--alpha", "90deg", "--load", "1,0", "--no-timestamp", "-o", p, "--cache-dir", c]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let first = std::fs::read_to_string(&path).unwrap();
    assert_eq!(std::fs::read_dir(&cache).unwrap().count(), 1);
    run(&["edge", "--alpha", "90deg", "--load", "1,0", "--no-timestamp", "-o", p, "--cache-dir", c]);
    assert_eq!(std::fs::read_to_string(&path).unwrap(), first);
    std::fs::remove_dir_all(&dir).unwrap();
}
