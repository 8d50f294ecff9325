use serde_json::Value;
use std::process::{Command, Output};

fn spinr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinr")).args(args).env_remove("SPINR_TOL").output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

#[test]
fn hermitian_report() {
    let out = spinr(&["space", "--space", "cpn-hermitian", "--n", "2", "--s", "3", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    keys.sort();
    assert_eq!(keys, ["checks", "dim_invariant", "group", "m", "n", "r", "runtime_ms", "space", "tolerance"]);
    assert_eq!(v["dim_invariant"], 2);
    assert_eq!(v["checks"]["pure"], true);
    assert_eq!(v["checks"]["parallel"], true);
    assert!((v["checks"]["einstein_constant"].as_f64().unwrap() - 6.0).abs() < 1e-8);
}

#[test]
fn quaternionic_report() {
    let v = json(&spinr(&["space", "--space", "hpn", "--n", "3"]));
    assert_eq!((v["r"].as_u64(), v["m"].as_u64(), v["dim_invariant"].as_u64()), (Some(3), Some(3), Some(1)));
    assert_eq!(v["checks"]["pure"], true);
    assert_eq!(v["checks"]["parallel"], true);
}

#[test]
fn even_quaternionic_is_empty_not_an_error() {
    let out = spinr(&["space", "--space", "hpn", "--n", "2", "--r", "3", "--m", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["dim_invariant"], 0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("note"));
}

#[test]
fn invalid_input_exits_two() {
    for args in [
        &["space", "--space", "cpn-hermitian", "--n", "2", "--s", "4"][..],
        &["space", "--space", "hpn", "--n", "3", "--m", "2"],
        &["space", "--space", "nowhere"],
        &["space", "--space", "hpn", "--n", "3", "--tol", "-1"],
        &["verify", "--suite", "bogus"],
    ] {
        assert_eq!(spinr(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn environment_tolerance_is_reported() {
    let out = Command::new(env!("CARGO_BIN_EXE_spinr"))
        .args(["space", "--space", "cpn-hermitian", "--n", "3"])
        .env("SPINR_TOL", "1e-7")
        .output()
        .unwrap();
    assert_eq!(json(&out)["tolerance"]["residual_tol"], 1e-7);
    let flag = json(&spinr(&["space", "--space", "cpn-hermitian", "--n", "3", "--tol", "1e-6"]));
    assert_eq!(flag["tolerance"]["residual_tol"], 1e-6);
}

#[test]
fn basis_dump_is_sorted() {
    let path = std::env::temp_dir().join(format!("spinr-dump-{}.json", std::process::id()));
    let out = spinr(&["space", "--space", "cpn-hermitian", "--n", "2", "--dump-basis", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json(&out)["basis"].is_array());
    let dump: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    std::fs::remove_file(&path).ok();
    let vectors = dump.as_array().unwrap();
    assert_eq!(vectors.len(), 2);
    let list = |x: &Value| -> Vec<u64> { x.as_array().unwrap().iter().map(|i| i.as_u64().unwrap()).collect() };
    for v in vectors {
        let keys: Vec<(Vec<u64>, Vec<Vec<u64>>)> = v
            .as_array()
            .unwrap()
            .iter()
            .map(|t| (list(&t["tangent_mask"]), t["aux_masks"].as_array().unwrap().iter().map(list).collect()))
            .collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]));
    }
}

#[test]
fn markdown_table_for_symplectic() {
    let out = spinr(&["space", "--space", "cpn-symplectic", "--n", "1", "--markdown"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("| space |"));
    assert!(text.contains("| cpn-symplectic | Sp(2) | 1 | 1 | 1 | 2 |"));
}

#[test]
fn verify_clifford_suite() {
    let out = spinr(&["verify", "--suite", "clifford"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("[PASS] 10"));
    assert!(text.contains("1/1 criteria passed"));
}
