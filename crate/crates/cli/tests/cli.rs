use std::path::{Path, PathBuf};
use std::process::Command;

use sparse_ldp_cli::table::{AUDIT_COLUMNS, KD_COLUMNS, POINT_COLUMNS};

const BIN: &str = env!("CARGO_BIN_EXE_sparse-ldp");

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(dir: &Path, cmd: &str, config: &str, out: &str, extra: &[&str]) -> Run {
    let cfg = dir.join(format!("{}.json", out.replace('/', "_")));
    std::fs::write(&cfg, config).unwrap();
    let output = Command::new(BIN)
        .arg(cmd)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join(out))
        .args(extra)
        .env_remove("SPARSE_LDP_THREADS")
        .output()
        .unwrap();
    Run {
        code: output.status.code().unwrap(),
        stdout: String::from_utf8(output.stdout).unwrap(),
        stderr: String::from_utf8(output.stderr).unwrap(),
    }
}

fn read_csv(path: PathBuf) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn kd_table_has_exact_small_values() {
    let dir = tempfile::tempdir().unwrap();
    let r = run(dir.path(), "kd", r#"{"d_min": 1, "d_max": 10}"#, "kd.csv", &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (header, rows) = read_csv(dir.path().join("kd.csv"));
    assert_eq!(header, KD_COLUMNS);
    assert_eq!(rows.len(), 10);
    assert_eq!(rows[2][1], "2");
    assert_eq!(rows[3][1], "4");
    assert_eq!(rows[4][4], "8/3");
    assert!(rows[1][1].is_empty() && rows[1][5].contains("even d = 2"));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("kd.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "kd");
    assert_eq!(manifest["status"], "ok");
    assert_eq!(manifest["schema_version"], 1);
}

#[test]
fn audit_passes_and_negative_control_fails() {
    let dir = tempfile::tempdir().unwrap();
    let small = r#"{"dims": [3, 4], "alphas": [1.0], "unbiased_dims": [3, 4], "local_triples": 1000}"#;
    let r = run(dir.path(), "audit", small, "audit.csv", &[]);
    assert_eq!(r.code, 0, "{}{}", r.stdout, r.stderr);
    assert!(r.stdout.lines().all(|l| l.starts_with("PASS")));
    let (header, rows) = read_csv(dir.path().join("audit.csv"));
    assert_eq!(header, AUDIT_COLUMNS);
    assert_eq!(rows.len(), 2 * 2 + 2);

    let tampered = r#"{"dims": [3], "alphas": [1.0], "unbiased_dims": [3], "local_triples": 10, "magnitude_scale": 2.0}"#;
    let r = run(dir.path(), "audit", tampered, "tampered.csv", &[]);
    assert_eq!(r.code, 2);
    assert!(r.stdout.lines().any(|l| l.starts_with("FAIL unbiasedness")));
    let manifest = std::fs::read_to_string(dir.path().join("tampered.manifest.json")).unwrap();
    assert!(manifest.contains("certificate_failure"));
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let even = r#"{"d": 2, "s": 1, "n": 100, "a": 1, "alpha": 1, "mechanism": "GLOBAL", "trials": 2}"#;
    let r = run(dir.path(), "risk", even, "even.csv", &[]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("even d = 2"), "{}", r.stderr);

    let r = run(dir.path(), "risk", "{not json", "bad.csv", &[]);
    assert_eq!(r.code, 1);
    let r = run(dir.path(), "audit", r#"{"dims": [21]}"#, "big.csv", &[]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("enumeration"), "{}", r.stderr);
    let r = run(dir.path(), "kd", "{}", "kd.csv", &["--threads", "0"]);
    assert_eq!(r.code, 1);

    let missing = Command::new(BIN).args(["risk", "--out", "x.csv"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn unwritable_output_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let r = run(dir.path(), "kd", r#"{"d": [3]}"#, "no/such/dir.csv", &[]);
    assert_eq!(r.code, 3, "{}", r.stderr);
}

#[test]
fn sweep_schema_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{
        "base": {"d": 7, "s": 2, "n": 3000, "a": 1.0, "alpha": 2.0, "mechanism": "GLOBAL", "trials": 50},
        "axis": "A", "grid": [0.5, 1.0, 3.0]
    }"#;
    let r = run(dir.path(), "sweep", cfg, "sweep.csv", &["--trials", "4", "--seed", "9"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (header, rows) = read_csv(dir.path().join("sweep.csv"));
    assert_eq!(header, POINT_COLUMNS);
    assert_eq!(rows.len(), 3);
    for (row, a) in rows.iter().zip(["0.5", "1", "3"]) {
        assert_eq!(row[0], "A");
        assert_eq!(row[1], a);
        assert_eq!(row[13], "4");
        assert!(!row[11].is_empty() && !row[14].is_empty());
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("sweep.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 9);
    assert_eq!(manifest["config"]["base"]["trials"], 4);
}

#[test]
fn rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"d": 9, "s": 3, "n": 5000, "a": 0.7, "alpha": 1.5, "mechanism": "LOCAL",
                  "policy": {"kind": "SMALL_A"}, "trials": 6, "seed": 3}"#;
    assert_eq!(run(dir.path(), "risk", cfg, "a.csv", &[]).code, 0);
    assert_eq!(run(dir.path(), "risk", cfg, "b.csv", &["--threads", "3"]).code, 0);
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);
    assert!(a.windows(2).any(|w| w == b"\r\n"));
    let ta = std::fs::read(dir.path().join("a.trials.csv")).unwrap();
    let tb = std::fs::read(dir.path().join("b.trials.csv")).unwrap();
    assert_eq!(ta, tb);
}

#[test]
fn bounds_without_axis_gives_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"base": {"d": 100, "s": 5, "n": 100000, "a": 2, "alpha": 1, "mechanism": "LOCAL"}}"#;
    let r = run(dir.path(), "bounds", cfg, "b.csv", &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (_, rows) = read_csv(dir.path().join("b.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], "NONE");
    assert!(rows[0][11].is_empty());
    // N = nα²/d² = 10: the null terms barely decay, 20 · exp(−10 τ²/128) with τ = C₁/2.
    let ub: f64 = rows[0][15].parse().unwrap();
    let c1 = 0.954_499_736_103_641_6f64;
    let expected = 20.0 * (-10.0 * c1 * c1 / 512.0).exp();
    assert!((ub - expected).abs() < 1e-6, "{ub} vs {expected}");
}
