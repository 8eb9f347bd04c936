use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn bildsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bildsim")).args(args).output().expect("binary runs")
}

fn run_fixture(command: &str, out: &Path) -> Output {
    let config = configs().join(format!("{command}.json"));
    bildsim(&[command, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap(), "--threads", "2"])
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

fn error_of(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stderr).unwrap_or_else(|_| panic!("stderr is json: {}", String::from_utf8_lossy(&o.stderr)))
}

#[test]
fn chsh_quantum_reaches_tsirelson() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_fixture("chsh-quantum", dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = read_json(&dir.path().join("summary.json"));
    let abs_s = s["abs_S_quantum"].as_f64().unwrap();
    assert!((abs_s - 2.0 * 2f64.sqrt()).abs() < 1e-9, "{abs_s}");
    let grid = s["grid_maximum"]["max_abs_s"].as_f64().unwrap();
    assert!(grid <= 2.0 * 2f64.sqrt() + 1e-9 && grid > 2.8, "{grid}");
}

#[test]
fn pcsft_average_reports_exact_trace() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_fixture("pcsft-average", dir.path());
    assert!(o.status.success());
    let mut rdr = csv::Reader::from_path(dir.path().join("results.csv")).unwrap();
    let headers = rdr.headers().unwrap().clone();
    let qi = headers.iter().position(|h| h == "quantity").unwrap();
    let ei = headers.iter().position(|h| h == "exact").unwrap();
    let mi = headers.iter().position(|h| h == "mc_mean").unwrap();
    let si = headers.iter().position(|h| h == "mc_stderr").unwrap();
    let row = rdr.records().map(|r| r.unwrap()).find(|r| &r[qi] == "average").unwrap();
    let exact: f64 = row[ei].parse().unwrap();
    let mean: f64 = row[mi].parse().unwrap();
    let se: f64 = row[si].parse().unwrap();
    assert!((exact - 2.0).abs() < 1e-12);
    assert!((mean - exact).abs() < 5.0 * se);
}

#[test]
fn manifest_lists_every_output() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_fixture("velocity-field", dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    let last = stdout.lines().last().unwrap();
    assert!(last.ends_with("manifest.json"), "{last}");

    let m = read_json(&dir.path().join("manifest.json"));
    assert_eq!(m["command"], "velocity-field");
    assert_eq!(m["seed"], 6);
    let outputs = m["outputs"].as_array().unwrap();
    let names: Vec<&str> = outputs.iter().map(|e| e["file"].as_str().unwrap()).collect();
    for f in ["velocity.csv", "overlay.csv", "sweep.csv", "summary.json", "plot.py"] {
        assert!(names.contains(&f), "{f} missing from {names:?}");
    }
    for e in outputs {
        let bytes = std::fs::read(dir.path().join(e["file"].as_str().unwrap())).unwrap();
        assert_eq!(e["bytes"].as_u64().unwrap() as usize, bytes.len());
        assert_eq!(e["sha256"].as_str().unwrap(), bildsim_cli::output::sha256_hex(&bytes));
    }

    let header = std::fs::read_to_string(dir.path().join("velocity.csv")).unwrap();
    assert_eq!(
        header.lines().next().unwrap(),
        "bin_center,v_plus,v_plus_err,v_minus,v_minus_err,u,u_err,epsilon,count"
    );
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = configs().join("chsh-hv.json");
    let o = bildsim(&["chsh-hv", "--config", config.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "--seed", "77"]);
    assert!(o.status.success());
    assert_eq!(read_json(&dir.path().join("manifest.json"))["seed"], 77);
}

#[test]
fn negative_time_step_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = read_json(&configs().join("brownian-ctm.json"));
    c["dt"] = serde_json::json!(-0.001);
    let path = dir.path().join("bad.json");
    std::fs::write(&path, serde_json::to_vec(&c).unwrap()).unwrap();
    let out = dir.path().join("out");
    let o = bildsim(&["brownian-ctm", "--config", path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let e = error_of(&o);
    assert_eq!(e["error"]["kind"], "config");
    assert_eq!(e["error"]["exit_code"], 2);
    assert!(e["error"]["message"].as_str().unwrap().contains("dt"), "{e}");
    assert!(!out.join("manifest.json").exists());
}

#[test]
fn unknown_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = read_json(&configs().join("pcsft-average.json"));
    c["kernal"] = serde_json::json!(1);
    let path = dir.path().join("bad.json");
    std::fs::write(&path, serde_json::to_vec(&c).unwrap()).unwrap();
    let o = bildsim(&["pcsft-average", "--config", path.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(error_of(&o)["error"]["message"].as_str().unwrap().contains("kernal"));
}

#[test]
fn non_psd_covariance_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = read_json(&configs().join("pcsft-average.json"));
    c["covariance"]["re"] = serde_json::json!([[1.0, 0.0], [0.0, -1.0]]);
    let path = dir.path().join("bad.json");
    std::fs::write(&path, serde_json::to_vec(&c).unwrap()).unwrap();
    let o = bildsim(&["pcsft-average", "--config", path.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(error_of(&o)["error"]["message"].as_str().unwrap().starts_with("covariance"));
}

#[test]
fn missing_config_file_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = bildsim(&["chsh-hv", "--config", "/nonexistent/x.json", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}
