use std::path::Path;
use std::process::{Command, Output};

fn sombrero(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sombrero"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_column(path: &Path, name: &str) -> Vec<String> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().to_string()).collect()
}

#[test]
fn validate_reports_windows_and_exit_codes() {
    let o = sombrero(&["validate", "--g", "3", "--N", "5", "--l", "0", "--a", "1.2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("a window = [1.0000, 1.2332]"));

    let o = sombrero(&["validate", "--g", "3", "--N", "3", "--l", "0", "--a", "0.6"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("g^2 window = [7.1111, 11.5556]"));

    let o = sombrero(&["validate", "--g", "1", "--N", "3", "--l", "2", "--a", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("invalid (g < k/a+1 = 7.0000)"));

    let o = sombrero(&["validate", "--g", "3", "--N", "1", "--a", "1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn solve_writes_decreasing_energies_and_profile() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = sombrero(&["solve", "--g", "3", "--N", "5", "--l", "0", "--a", "1.2", "--bc", "A", "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let e: Vec<f64> = csv_column(&dir.path().join("iterations.csv"), "energy")
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    assert!(e.len() >= 8);
    assert!(e.windows(2).all(|w| w[1] < w[0]));
    assert!(dir.path().join("profile.csv").exists());
}

#[test]
fn breakdown_has_its_own_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = sombrero(&["solve", "--g", "3", "--N", "3", "--l", "3", "--a", "2.1", "--bc", "B", "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("boundary breakdown"));
    // the partial sequence is still written
    assert!(dir.path().join("iterations.csv").exists());
}

#[test]
fn outside_window_is_refused_unless_forced() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = sombrero(&["solve", "--g", "3", "--N", "5", "--a", "2", "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    let o = sombrero(&["solve", "--g", "3", "--N", "5", "--a", "2", "--force", "--out", out]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn emitted_radial_function_vanishes_at_origin_for_positive_l() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = sombrero(&["solve", "--g", "3", "--N", "3", "--l", "1", "--a", "1.2", "--emit-R", "--out", out]);
    assert_eq!(o.status.code(), Some(0));
    let r = csv_column(&dir.path().join("profile.csv"), "r");
    let big_r = csv_column(&dir.path().join("profile.csv"), "R");
    assert_eq!(r[0].parse::<f64>().unwrap(), 0.0);
    assert_eq!(big_r[0].parse::<f64>().unwrap(), 0.0);
    assert!(big_r[1].parse::<f64>().unwrap() > 0.0);
}

#[test]
fn oracle_column_is_written_on_request() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = sombrero(&["solve", "--g", "3", "--N", "3", "--a", "0.6", "--oracle", "--out", out]);
    assert_eq!(o.status.code(), Some(0));
    let path = dir.path().join("iterations.csv");
    let e: f64 = csv_column(&path, "energy").last().unwrap().parse().unwrap();
    let fd: f64 = csv_column(&path, "oracle_energy").last().unwrap().parse().unwrap();
    assert!((e - fd).abs() < 1e-8);
}

#[test]
fn output_is_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let out = d.path().to_str().unwrap();
        let o = sombrero(&["solve", "--g", "3", "--N", "4", "--a", "0.8", "--emit-R", "--out", out]);
        assert_eq!(o.status.code(), Some(0));
    }
    for f in ["iterations.csv", "profile.csv"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert_eq!(x, y, "{f}");
        assert!(!x.contains(&b'\r'));
    }
}

#[test]
fn table1_reports_rows_and_flags_mismatch() {
    let o = sombrero(&["table1"]);
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 9);
    assert!(text.lines().nth(1).unwrap().starts_with("5.00000000000e-1,4.00000000000e-1,4.557"));
    // two printed g^2_min entries sit just outside 0.025 of the exact values
    assert_eq!(o.status.code(), Some(2));
    let o = sombrero(&["table1", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["schema_version"], 1);
}

#[test]
fn proto1d_margins_and_refusal() {
    let o = sombrero(&["proto1d", "--g", "10", "--n", "6"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r[4] > 0.0));
    assert!((rows[0][1] - 0.26572).abs() < 1e-3);

    let o = sombrero(&["proto1d", "--g", "1.5"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn sweep_writes_one_file_per_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_sombrero"))
        .args(["sweep", "--g", "3", "--k", "1,1.5", "--a", "0.6,0.8", "--nodes", "1001", "--out", out])
        .env("SOMBRERO_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 3);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 2);
}

#[test]
fn angular_table_is_json() {
    let o = sombrero(&["angular", "--N-min", "3", "--N-max", "4", "--l-max", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let rows = v["data"].as_array().unwrap();
    assert_eq!(rows.len(), 12);
    let p2 = rows.iter().find(|r| r["dimension"] == 3 && r["l"] == 2 && r["m"] == 0).unwrap();
    assert_eq!(p2["exact"], serde_json::json!(["-1/2", "0", "3/2"]));
}
