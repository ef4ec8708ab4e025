use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn hamuniv(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_hamuniv"));
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn run_fixture(command: &str, name: &str, extra: &[&str]) -> (Output, tempfile::TempDir) {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let input = fixture(name);
    let mut args = vec![command, "--input", input.to_str().unwrap(), "--output", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    (hamuniv(&args, &[]), dir)
}

fn report(dir: &tempfile::TempDir) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_input(dir: &tempfile::TempDir, text: &str) -> PathBuf {
    let p = dir.path().join("input.json");
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn spectrum_csv_of_diag01() {
    let (o, dir) = run_fixture("spectrum", "spectrum_diag01.json", &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert_eq!(csv.trim_end(), "0\n1");
    let r = report(&dir);
    assert_eq!(r["command"], "spectrum");
    assert_eq!(r["pass"], true);
}

#[test]
fn spectrum_to_stdout() {
    let input = fixture("spectrum_diag01.json");
    let o = hamuniv(&["spectrum", "--input", input.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(0));
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["result"]["eigenvalues"], serde_json::json!([0.0, 1.0]));
}

#[test]
fn hmk_check_on_cnot_passes() {
    let (o, dir) = run_fixture("hmk-check", "hmk_cnot.json", &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = report(&dir);
    assert_eq!(r["pass"], true);
    assert_eq!(r["result"]["lemma"]["pass"], true);
    assert_eq!(r["result"]["first_order_ok"], true);
}

#[test]
fn other_fixtures_pass() {
    for (cmd, name) in [
        ("compile", "compile_cnot.json"),
        ("history", "history_cnot.json"),
        ("sw", "sw_two_level.json"),
        ("verify-sim", "verify_sim_block.json"),
    ] {
        let (o, dir) = run_fixture(cmd, name, &[]);
        assert_eq!(o.status.code(), Some(0), "{cmd}: {}", stderr(&o));
        assert_eq!(report(&dir)["pass"], true, "{cmd}");
    }
}

#[test]
fn history_counts_ground_space() {
    let (_, dir) = run_fixture("history", "history_cnot.json", &[]);
    let r = report(&dir);
    assert_eq!(r["result"]["ground_dim"], r["result"]["witness_dim"]);
    assert!(r["result"]["history_residual"].as_f64().unwrap() < 1e-9);
}

#[test]
fn malformed_json_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_input(&dir, "{\n  \"dim\": 2,\n  \"layout\": {\"site_dims\": [2]\n}\n");
    let o = hamuniv(&["spectrum", "--input", p.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("line") && e.contains("column"), "{e}");
}

#[test]
fn non_unitary_gate_is_named() {
    let text = std::fs::read_to_string(fixture("compile_cnot.json")).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["gates"][0]["label"] = "wobbly".into();
    v["gates"][0]["unitary"][0] = serde_json::json!([0.5, 0.0]);
    let dir = tempfile::tempdir().unwrap();
    let p = write_input(&dir, &v.to_string());
    let o = hamuniv(&["compile", "--input", p.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("gates[0]") && e.contains("wobbly"), "{e}");
}

#[test]
fn non_hermitian_reports_asymmetry() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_input(
        &dir,
        r#"{"dim":2,"layout":{"site_dims":[2]},"entries":[[0,0],[1,0],[0,0],[0,0]],"hermitian":true}"#,
    );
    let o = hamuniv(&["spectrum", "--input", p.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("max asymmetry"), "{}", stderr(&o));
}

#[test]
fn cap_exceeded_is_input_error() {
    let (o, _dir) = run_fixture("compile", "compile_cnot.json", &["--cap", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("cap"), "{}", stderr(&o));
    let input = fixture("compile_cnot.json");
    let o = hamuniv(&["compile", "--input", input.to_str().unwrap()], &[("HAMUNIV_CAP", "2")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_input_and_bad_const() {
    assert_eq!(hamuniv(&["spectrum"], &[]).status.code(), Some(2));
    let input = fixture("spectrum_diag01.json");
    let o = hamuniv(&["spectrum", "--input", input.to_str().unwrap(), "--const", "C_nope=1"], &[]);
    assert_eq!(o.status.code(), Some(2));
    let o = hamuniv(&["spectrum", "--input", input.to_str().unwrap(), "--const", "C_dev"], &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failed_bound_exits_one() {
    let (o, dir) = run_fixture("sw", "sw_two_level.json", &["--const", "C_sw=1e-6"]);
    assert_eq!(o.status.code(), Some(1));
    let r = report(&dir);
    assert_eq!(r["pass"], false);
    assert_eq!(r["constants"]["c_sw"], 1e-6);
}

#[test]
fn failed_precondition_exits_one_with_report() {
    let text = std::fs::read_to_string(fixture("sw_two_level.json")).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["delta"] = 0.1.into();
    let dir = tempfile::tempdir().unwrap();
    let p = write_input(&dir, &v.to_string());
    let out = dir.path().join("report.json");
    let o = hamuniv(&["sw", "--input", p.to_str().unwrap(), "--output", out.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(1));
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(r["pass"], false);
    assert!(r["result"]["error"].as_str().unwrap().contains("precondition"));
}

#[test]
fn env_overrides_seed_and_constants() {
    let input = fixture("verify_sim_block.json");
    let o = hamuniv(
        &["verify-sim", "--input", input.to_str().unwrap()],
        &[("HAMUNIV_SEED", "17"), ("HAMUNIV_CONST", "C_dev=3,C_proj=4")],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["seed"], 17);
    assert_eq!(r["constants"]["c_dev"], 3.0);
    assert_eq!(r["constants"]["c_proj"], 4.0);
    // the flag wins over the environment
    let o = hamuniv(&["verify-sim", "--input", input.to_str().unwrap(), "--seed", "5"], &[("HAMUNIV_SEED", "17")]);
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["seed"], 5);
}

#[test]
fn seed_changes_only_the_random_state() {
    let input = fixture("verify_sim_block.json");
    let a = hamuniv(&["verify-sim", "--input", input.to_str().unwrap(), "--seed", "1"], &[]);
    let b = hamuniv(&["verify-sim", "--input", input.to_str().unwrap(), "--seed", "2"], &[]);
    let ra: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    let rb: serde_json::Value = serde_json::from_slice(&b.stdout).unwrap();
    assert_eq!(ra["result"]["simulation"], rb["result"]["simulation"]);
    assert_eq!(ra["pass"], true);
    assert_eq!(rb["pass"], true);
}
