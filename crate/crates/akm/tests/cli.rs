use std::path::Path;
use std::process::{Command, Output};

use akm::io::read_csv;
use serde_json::Value;

fn akm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_akm")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn report_without_kappa_is_a_usage_error() {
    let o = akm(&["report"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("kappa required"));
}

#[test]
fn report_strong_coupling() {
    let o = akm(&["report", "--kappa", "100", "--delta-q", "1", "--balanced"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let f = |k: &str| v[k].as_f64().unwrap();
    assert!((f("product_retro") - 0.25 - f("delta2")).abs() < 1e-12);
    assert!(f("delta2") < 3e-4);
    assert_eq!(f("b"), 2.0);
    assert!((f("oracle_product_retro") - f("product_retro")).abs() < 1e-10);
}

#[test]
fn report_at_time_zero_uses_initial_statistics() {
    let o = akm(&["report", "--kappa", "1", "--delta-q", "1", "--b", "2", "--t", "0"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let f = |k: &str| v[k].as_f64().unwrap();
    assert_eq!(f("oracle_t"), 0.0);
    assert!((f("oracle_var_exi") - (0.5 + 1.0)).abs() < 1e-12);
    assert!((f("oracle_var_epi") - (0.125 + 0.25)).abs() < 1e-12);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.json");
    std::fs::write(&p, r#"{"kappa": 3.0, "delta_q": 0.5, "m3": 2.0}"#).unwrap();
    let o = akm(&["report", "--config", p.to_str().unwrap(), "--kappa", "4"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["kappa"].as_f64(), Some(4.0));
    assert_eq!(v["m3"].as_f64(), Some(2.0));
    assert_eq!(v["b"].as_f64(), Some(0.5));
    std::fs::write(&p, r#"{"kappa": 3.0, "colour": 1}"#).unwrap();
    assert_eq!(akm(&["report", "--config", p.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn invalid_values_are_usage_errors() {
    assert_eq!(akm(&["report", "--kappa", "-1"]).status.code(), Some(2));
    assert_eq!(akm(&["report", "--kappa", "1", "--b", "1", "--balanced"]).status.code(), Some(2));
    assert_eq!(akm(&["sweep", "--kappa", "1", "--param", "x", "--from", "1", "--to", "2", "--points", "3"]).status.code(), Some(2));
    assert_eq!(akm(&["wigner", "--kappa", "1", "--grid-n", "1"]).status.code(), Some(2));
}

#[test]
fn kappa_sweep_rows() {
    let args = [
        "sweep", "--kappa", "1", "--delta-q", "1", "--balanced", "--param", "kappa", "--from", "0.5", "--to", "100",
        "--points", "200", "--scale", "log",
    ];
    let o = akm(&args);
    assert_eq!(o.status.code(), Some(0));
    let (header, rows) = read_csv(o.stdout.as_slice()).unwrap();
    assert_eq!(header.join(","), "param,var_x1,var_x2,var_x3,var_p3,eta1,eta2,eta3,delta1,delta2,delta3,product_pointers,product_retro,product_pred");
    assert_eq!(rows.len(), 200);
    assert_eq!(rows[0][0], 0.5);
    assert_eq!(rows[199][0], 100.0);
    let last = &rows[199];
    assert!((last[11] - 1.0 - last[8]).abs() < 1e-12);
    assert!(last[11] - 1.0 < 5e-4);
    for w in rows.windows(2) {
        assert!(w[1][12] < w[0][12] && w[1][13] < w[0][13]);
    }
    assert_eq!(o.stdout, akm(&args).stdout);

    let two = akm(&["sweep", "--kappa", "1", "--param", "m1", "--from", "1", "--to", "2", "--points", "2"]);
    assert_eq!(read_csv(two.stdout.as_slice()).unwrap().1.len(), 2);
}

#[test]
fn unit_parameter_sweep_matches_reduced_form() {
    let o = akm(&["sweep", "--kappa", "1", "--balanced", "--param", "kappa", "--from", "0.5", "--to", "50", "--points", "7", "--scale", "log"]);
    for row in read_csv(o.stdout.as_slice()).unwrap().1 {
        let k2 = row[0] * row[0];
        let expected = 1.0 + (236.0 + 1211.0 * k2) / (288.0 * k2 * k2);
        assert!((row[11] - expected).abs() < 1e-10 * expected);
    }
}

#[test]
fn sample_writes_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let o = akm(&["sample", "--kappa", "0.5", "--delta-q", "1", "--b", "2", "--n", "50", "--seed", "9", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let (h, rows) = read_csv(std::fs::File::open(&out).unwrap()).unwrap();
    assert_eq!(h, ["x1", "x2"]);
    assert_eq!(rows.len(), 50);
    let meta: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("s.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 9);
    assert_eq!(meta["n"], 50);
    assert_eq!(meta["config"]["kappa"].as_f64(), Some(0.5));

    let one = akm(&["sample", "--kappa", "0.5", "--n", "1", "--seed", "9"]);
    assert_eq!(read_csv(one.stdout.as_slice()).unwrap().1.len(), 1);
    let again = akm(&["sample", "--kappa", "0.5", "--n", "1", "--seed", "9"]);
    assert_eq!(one.stdout, again.stdout);
    assert_eq!(akm(&["sample", "--kappa", "0.5", "--n", "0"]).status.code(), Some(2));
}

#[test]
fn wigner_grid_output() {
    let o = akm(&["wigner", "--kappa", "1", "--delta-q", "1", "--when", "initial", "--grid-n", "201", "--range", "6"]);
    let (h, rows) = read_csv(o.stdout.as_slice()).unwrap();
    assert_eq!(h, ["x3", "p3", "W"]);
    assert_eq!(rows.len(), 201 * 201);
    let cell = (12.0f64 / 200.0).powi(2);
    let total: f64 = rows.iter().map(|r| r[2]).sum::<f64>() * cell;
    assert!((total - 1.0).abs() < 1e-4);
    let peak = rows.iter().map(|r| r[2]).fold(0.0, f64::max);
    assert!((peak - std::f64::consts::FRAC_1_PI).abs() < 1e-12);

    let post = akm(&["wigner", "--kappa", "1", "--delta-q", "1", "--b", "2", "--when", "post", "--grid-n", "51"]);
    let peak = read_csv(post.stdout.as_slice()).unwrap().1.iter().map(|r| r[2]).fold(0.0, f64::max);
    assert!(peak < std::f64::consts::FRAC_1_PI);
}

#[test]
fn verify_reports_failures_by_name() {
    let o = akm(&["verify", "--level", "quick"]);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let failing: Vec<&str> = v["failing"].as_array().unwrap().iter().map(|s| s.as_str().unwrap()).collect();
    assert!(failing.contains(&"analytic-vs-symplectic"));
    assert!(!failing.contains(&"staged-vs-symplectic"));
    assert!(v["trace"]["sigma3"].is_array());

    let mutated = akm(&["verify", "--inject", "gamma5"]);
    assert_eq!(mutated.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&mutated.stderr);
    assert!(stderr.contains("FAIL analytic-vs-symplectic"));
    assert!(stderr.contains("FAIL analytic-matches-equivalent-sequence"));
}

#[test]
fn report_can_dump_the_grid_field() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("f.bin");
    let o = akm(&[
        "report", "--kappa", "1", "--b", "2", "--dump-field", p.to_str().unwrap(), "--grid-n", "64", "--half-width", "16",
    ]);
    // The coarse grid aliases enough to trip the support check.
    assert_eq!(o.status.code(), Some(1));
    assert!(!Path::new(&p).exists() || std::fs::metadata(&p).unwrap().len() == 0);
    let o = akm(&["report", "--kappa", "1", "--b", "2", "--dump-field", p.to_str().unwrap(), "--grid-n", "128"]);
    assert_eq!(o.status.code(), Some(0));
    let f = akm::io::read_field(std::io::BufReader::new(std::fs::File::open(&p).unwrap())).unwrap();
    assert_eq!(f.grid.n(), 128);
    assert!((f.norm_sq() - 1.0).abs() < 1e-8);
}
