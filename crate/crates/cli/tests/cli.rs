use std::path::Path;
use std::process::{Command, Output};

fn geoatt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_geoatt"))
        .args(args)
        .env_remove("GEOATT_THREADS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn write_config(dir: &Path, name: &str, json: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, json).unwrap();
    p.to_str().unwrap().to_string()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse::<f64>().unwrap()).collect())
        .collect();
    (header, rows)
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

const SADDLE: &str = r#"{"projection": {"mask": [true, false, false]}, "r0": {"matrix": [[1,0,0],[0,-1,0],[0,0,-1]]}}"#;

#[test]
fn simulate_example_converges() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("traj.csv");
    let o = geoatt(&["simulate", "--preset", "paper-sec8", "--tmax", "10", "--dt", "1e-3", "--stop-v", "1e-6", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&out);
    assert_eq!(header.len(), 1 + 9 + 3 + 3 + 3 + 1);
    assert_eq!(&header[..2], &["t".to_string(), "r11".to_string()]);
    let v = col(&header, "V");
    assert!((rows[0][v] - (3.0 + 1.0 / 3f64.sqrt() + 1.0 / 6f64.sqrt())).abs() < 1e-14);
    assert!(rows.last().unwrap()[v] <= 1e-6);
}

#[test]
fn round_trip_rows_are_rotations() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("traj.csv");
    let o = geoatt(&["simulate", "--preset", "paper-sec8", "--tmax", "3", "--dt", "1e-2", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let (_, rows) = read_csv(&out);
    assert_eq!(rows.len(), 301);
    for row in rows {
        let entries: Vec<f64> = row[1..10].to_vec();
        geoatt::RotationMatrix::from_row_slice(3, &entries).expect("row is a rotation");
    }
}

#[test]
fn json_output_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("traj.json");
    let o = geoatt(&["simulate", "--preset", "paper-sec8", "--tmax", "0.5", "--dt", "0.1", "--format", "json", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["columns"][0], "t");
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 6);
    for row in rows {
        let entries: Vec<f64> = row.as_array().unwrap()[1..10].iter().map(|x| x.as_f64().unwrap()).collect();
        geoatt::RotationMatrix::from_row_slice(3, &entries).unwrap();
    }
}

#[test]
fn deterministic_output() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for p in [&a, &b] {
        let o = geoatt(&["simulate", "--seed", "17", "--tmax", "2", "--dt", "1e-2", "--out", p.to_str().unwrap()]);
        assert!(matches!(code(&o), 0 | 2));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn identity_start_single_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "id.json", r#"{"r0": "identity"}"#);
    let out = dir.path().join("id.csv");
    let o = geoatt(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let (_, rows) = read_csv(&out);
    assert_eq!(rows.len(), 1);
}

#[test]
fn saddle_does_not_converge() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "s.json", SADDLE);
    let o = geoatt(&["simulate", "--config", &cfg, "--tmax", "1", "--out", dir.path().join("s.csv").to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn invalid_input_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), "bad.json", r#"{"r0": {"matrix": [[1,0],[0,-1]]}}"#);
    let o = geoatt(&["simulate", "--config", &bad]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("r0"));
    let o = geoatt(&["simulate", "--k", "-2"]);
    assert_eq!(code(&o), 1);
    let broken = write_config(dir.path(), "broken.json", "{\n  \"k\": 1,\n  \"dt\": oops\n}");
    let o = geoatt(&["simulate", "--config", &broken]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn compare_example_and_identity() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cmp.csv");
    let o = geoatt(&["compare", "--preset", "paper-sec8", "--tmax", "5", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let (header, rows) = read_csv(&out);
    let e = col(&header, "err_fro");
    assert!(rows.iter().all(|r| r[e] <= 1e-6));

    let cfg = write_config(dir.path(), "id.json", r#"{"r0": "identity", "projection": {"mask": [false, true, false]}}"#);
    let o = geoatt(&["compare", "--config", &cfg, "--tmax", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let (_, rows) = read_csv(&out);
    assert!(rows.iter().all(|r| r[1..].iter().all(|&x| x == 0.0)));
}

#[test]
fn compare_rejects_negative_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "n.json", r#"{"r0": {"matrix": [[-1,0,0],[0,1,0],[0,0,-1]]}}"#);
    let o = geoatt(&["compare", "--config", &cfg]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("-1"));
}

#[test]
fn figures_example() {
    let dir = tempfile::tempdir().unwrap();
    let o = geoatt(&["figures", "--preset", "paper-sec8", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    for f in ["figure1.csv", "figure2.csv", "figure1.gp", "figure2.gp"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let (header, rows) = read_csv(&dir.path().join("figure2.csv"));
    let (e, d) = (col(&header, "err_axis_2"), col(&header, "dist_axis_2"));
    let first = &rows[0];
    // the middle axis starts farthest from its target
    assert!(first[e] >= first[col(&header, "err_axis_1")] && first[e] >= first[col(&header, "err_axis_3")]);
    assert!((first[e] - (-1.0 / 3f64.sqrt()).acos()).abs() < 1e-12);
    // and travels along a great circle: distance covered plus distance left
    // is the initial distance
    for r in &rows {
        assert!((r[d] + r[e] - first[e]).abs() < 1e-3, "t = {}", r[0]);
    }
    assert!((rows.last().unwrap()[0] - 5.0).abs() < 1e-12);

    let text = std::fs::read_to_string(dir.path().join("figure1.csv")).unwrap();
    let frames: Vec<&str> = text.lines().filter(|l| l.starts_with("frame")).collect();
    assert_eq!(frames.len(), 12);
    for l in text.lines().skip(1) {
        let f: Vec<f64> = l.split(',').skip(3).map(|x| x.parse().unwrap()).collect();
        assert!((f.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn figures_identity_flat() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "id.json", r#"{"r0": "identity"}"#);
    let o = geoatt(&["figures", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let (_, rows) = read_csv(&dir.path().join("figure2.csv"));
    assert!(rows.iter().all(|r| r[1..].iter().all(|&x| x == 0.0)));
}

fn analyze(args: &[&str]) -> serde_json::Value {
    let o = geoatt(args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn analyze_identity() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "id.json", r#"{"r0": "identity", "k": 2}"#);
    let v = analyze(&["analyze", "--config", &cfg]);
    assert_eq!(v["classification"]["kind"], "identity");
    let spec = v["spectrum"].as_array().unwrap();
    let got: Vec<(f64, u64)> = spec
        .iter()
        .map(|c| (c["re"].as_f64().unwrap(), c["multiplicity"].as_u64().unwrap()))
        .collect();
    assert_eq!(got.len(), 2);
    assert!((got[0].0 + 4.0).abs() < 1e-8 && got[0].1 == 1);
    assert!((got[1].0 + 1.0).abs() < 1e-8 && got[1].1 == 2);
    assert_eq!(v["predicted_spectrum"][0]["value"], -1.0);
    assert_eq!(v["predicted_spectrum"][0]["multiplicity"], 2);
}

#[test]
fn analyze_saddle_and_generic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "s.json", SADDLE);
    let v = analyze(&["analyze", "--config", &cfg]);
    assert_eq!(v["classification"]["kind"], "saddle");
    assert_eq!(v["classification"]["i"], 2);
    assert!(v["unstable_eigenvalues"].as_u64().unwrap() >= 1);

    let cfg = write_config(dir.path(), "h.json", r#"{"r0": {"haar_seed": 7}}"#);
    let v = analyze(&["analyze", "--config", &cfg]);
    assert_eq!(v["classification"]["kind"], "non_equilibrium");
    assert!(v["classification"]["residuals"]["stationarity"].as_f64().unwrap() > 1e-8);
    assert!(v["block_residuals"]["trace_circle"].as_f64().unwrap() < 1e-10);
}

#[test]
fn montecarlo_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "id.json", r#"{"r0": "identity"}"#);
    let o = geoatt(&["montecarlo", "--config", &cfg, "--samples", "1"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["converged"], 1);

    let cfg = write_config(dir.path(), "s.json", SADDLE);
    let o = geoatt(&["montecarlo", "--config", &cfg, "--samples", "1", "--tmax", "2"]);
    assert_eq!(code(&o), 3);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["converged"], 0);
    assert_eq!(v["failures"].as_array().unwrap().len(), 1);

    let o = geoatt(&["montecarlo", "--samples", "0"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn montecarlo_haar_is_deterministic_across_thread_counts() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_geoatt"))
            .args(["montecarlo", "--preset", "paper-sec8", "--samples", "40", "--seed", "1", "--dt", "1e-2", "--stop-v", "1e-8"])
            .env("GEOATT_THREADS", threads)
            .output()
            .unwrap()
    };
    let (a, b) = (run("1"), run("4"));
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stdout));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&geoatt(&["simulate", "--bogus"])), 1);
    assert_eq!(code(&geoatt(&["frobnicate"])), 1);
    assert_eq!(code(&geoatt(&["simulate", "--method", "euler"])), 1);
    assert_eq!(code(&geoatt(&["--help"])), 0);
}
