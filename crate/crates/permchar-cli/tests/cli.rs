use std::process::{Command, Output};

fn permchar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_permchar"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid json")
}

#[test]
fn exact_first_moment_example() {
    let doc = stdout_json(&permchar(&["exact", "--n", "5", "--x", "0.3,0", "--s", "1"]));
    assert_eq!(doc["schema"], 1);
    assert_eq!(doc["method"], "partition-sum");
    assert!((doc["value"]["re"].as_f64().unwrap() - 0.7).abs() < 1e-12);
    assert!(doc["value"]["im"].as_f64().unwrap().abs() < 1e-12);
}

#[test]
fn gf_dimension_zero_convention() {
    let doc = stdout_json(&permchar(&["gf", "--n", "0", "--x", "0.3,0", "--s", "2"]));
    assert_eq!(doc["value"]["re"], 1.0);
}

#[test]
fn gf_complex_exponent_matches_exact() {
    let a = stdout_json(&permchar(&["gf", "--n", "12", "--x", "0.2,0.3", "--s", "0.5,0.5"]));
    let b = stdout_json(&permchar(&["exact", "--n", "12", "--x", "0.2,0.3", "--s", "0.5,0.5"]));
    assert_eq!(a["method"], "gf-exp-log");
    for part in ["re", "im"] {
        let x = a["value"][part].as_f64().unwrap();
        let y = b["value"][part].as_f64().unwrap();
        assert!((x - y).abs() < 1e-9, "{part}: {x} vs {y}");
    }
}

#[test]
fn limit_matches_large_n_gf() {
    let lim = stdout_json(&permchar(&["limit", "--x", "0.4,0", "--s", "2"]));
    let at80 = stdout_json(&permchar(&["gf", "--n", "80", "--x", "0.4,0", "--s", "2"]));
    let dx = lim["value"]["re"].as_f64().unwrap() - at80["value"]["re"].as_f64().unwrap();
    assert!(dx.abs() < 1e-8);
}

#[test]
fn asymptotic_csv_row() {
    let out = permchar(&[
        "asymptotic", "--s1", "1", "--s2", "1", "--x", "polar:1,1.0", "--n", "5000", "--output",
        "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "n,exact_re,exact_im,pred_re,pred_im,ratio_abs");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "5000");
    let ratio: f64 = row[5].parse().unwrap();
    assert!((ratio - 1.0).abs() < 0.05, "ratio {ratio}");
}

#[test]
fn sweep_emits_monotone_header_rows() {
    let out = permchar(&[
        "sweep", "--n-start", "1", "--n-end", "9", "--n-step", "4", "--x", "0.5,0", "--s", "1",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,re,im");
    assert_eq!(lines.len(), 4);
    // E[Z_n(0.5)] = 0.5 for every n
    for row in &lines[1..] {
        let re: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
        assert!((re - 0.5).abs() < 1e-12);
    }
}

#[test]
fn simulate_reports_coupling_statistics() {
    let doc = stdout_json(&permchar(&[
        "simulate", "--n", "20", "--m", "3", "--samples", "2000", "--seed", "7",
    ]));
    assert_eq!(doc["method"], "feller-coupling");
    assert_eq!(doc["violations"], 0);
    let y1 = doc["y_mean"][0].as_f64().unwrap();
    assert!((y1 - 1.0).abs() < 0.1, "E Y_1 = {y1}");
}

#[test]
fn simulate_mc_moment_close_to_exact() {
    let doc = stdout_json(&permchar(&[
        "simulate", "--n", "25", "--x", "0.5,0", "--s", "1", "--samples", "20000",
    ]));
    assert_eq!(doc["method"], "cycle-type-mc");
    let re = doc["value"]["re"].as_f64().unwrap();
    let stderr = doc["stderr"].as_f64().unwrap();
    assert!((re - 0.5).abs() < 5.0 * stderr, "mean {re}, stderr {stderr}");
}

#[test]
fn zinfty_mean_near_limit() {
    let doc = stdout_json(&permchar(&[
        "zinfty", "--x", "0.4,0", "--s", "1", "--samples", "20000",
    ]));
    let mean = doc["value"]["re"].as_f64().unwrap();
    let limit = doc["limit"]["re"].as_f64().unwrap();
    let stderr = doc["stderr"].as_f64().unwrap();
    assert!((mean - limit).abs() < 5.0 * stderr);
}

#[test]
fn identical_configs_identical_output_modulo_elapsed() {
    let args = ["simulate", "--n", "30", "--m", "4", "--samples", "3000"];
    let mut a = stdout_json(&permchar(&args));
    let mut b = stdout_json(&permchar(&args));
    a.as_object_mut().unwrap().remove("elapsed_ms");
    b.as_object_mut().unwrap().remove("elapsed_ms");
    assert_eq!(a, b);
}

#[test]
fn arity_mismatch_exits_2() {
    let out = permchar(&["exact", "--n", "5", "--x", "0.3,0", "--x", "0.1,0", "--s", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn bad_complex_literal_exits_2() {
    let out = permchar(&["exact", "--n", "5", "--x", "zebra", "--s", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn root_of_unity_exits_1() {
    let out = permchar(&[
        "asymptotic", "--s1", "2", "--s2", "2", "--x", "polar:1,1.5707963267948966", "--n", "100",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("root of unity"));
}

#[test]
fn selftest_passes() {
    let out = permchar(&["selftest"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("all checks passed"));
}

#[test]
fn dump_writes_per_draw_csv() {
    let dir = std::env::temp_dir().join("permchar-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("draws.csv");
    let out = permchar(&[
        "simulate", "--n", "15", "--m", "2", "--samples", "50", "--dump",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "draw,m,c_m,y_m,boundary");
    assert_eq!(lines.len(), 1 + 50 * 2);
    std::fs::remove_file(&path).unwrap();
}
