use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
}

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_optolink"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .output()
        .unwrap()
}

#[test]
fn tampered_calibration_is_a_regression() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &[
            "tables",
            "-f",
            scenario("tampered_calibration.json").to_str().unwrap(),
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    let power = fs::read_to_string(dir.path().join("power.csv")).unwrap();
    assert!(power.contains("MISMATCH"));
}

#[test]
fn reference_rows_present() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["tables"]).status.code(), Some(0));
    let bitrate = fs::read_to_string(dir.path().join("bitrate.csv")).unwrap();
    assert!(bitrate.starts_with("# optolink tables generated_at=1700000000\n"));
    assert!(bitrate.contains("\n128,3.04ns,5.26GB/s,10ps,1.6TB/s,ok\n"));
    let power = fs::read_to_string(dir.path().join("power.csv")).unwrap();
    assert!(power.contains("\n128,16,2048,1332.31uW,26.36W,26.31W,+0.18%,ok\n"));
}

#[test]
fn malformed_scenario_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{ \"schema_version\": 1, ").unwrap();
    let out = run(dir.path(), &["simulate", "-f", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.json"));

    fs::write(&bad, r#"{"schema_version": 1, "topology": {"reference": {"cores": 1, "bitwidth": 8}}, "extra": 1}"#)
        .unwrap();
    assert_eq!(
        run(dir.path(), &["simulate", "-f", bad.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(dir.path(), &["simulate", "-f", "/nonexistent.json"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["compare"]).status.code(), Some(2));
    assert_eq!(
        run(dir.path(), &["compare", "--channels", "0"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(dir.path(), &["ntt-selftest", "--max-n", "12"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(dir.path(), &["tables", "--format", "xml"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn model_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("s.json");
    fs::write(
        &s,
        r#"{"schema_version": 1, "topology": {"reference": {"cores": 0, "bitwidth": 8}}}"#,
    )
    .unwrap();
    assert_eq!(
        run(dir.path(), &["simulate", "-f", s.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn sweep_cli_axis_overrides_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario("sweep_bitwidth.json");
    let out = run(
        dir.path(),
        &[
            "--format",
            "csv",
            "sweep",
            "-f",
            path.to_str().unwrap(),
            "--axis",
            "n",
            "--values",
            "256,1024",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(!dir.path().join("sweep.json").exists());
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(2).collect();
    assert_eq!(rows.len(), 2);
    assert!(
        rows[0].starts_with("n,256,") && rows[1].starts_with("n,1024,"),
        "{csv}"
    );
}

#[test]
fn bitwidth_sweep_reproduces_bandwidths() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &[
            "--format",
            "json",
            "sweep",
            "-f",
            scenario("sweep_bitwidth.json").to_str().unwrap(),
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("sweep.json")).unwrap()).unwrap();
    let bw: Vec<f64> = v["data"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["perf"]["link_bandwidth"].as_f64().unwrap())
        .collect();
    assert_eq!(bw, vec![0.4, 0.8, 1.6]);
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_optolink"))
        .args(["compare", "--channels", "192"])
        .env("OPTOLINK_OUT_DIR", dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    assert!(dir.path().join("compare.csv").exists());
}
